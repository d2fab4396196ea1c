use std::fmt;
use std::str::FromStr;

/// Which step produced an orientation decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Tier,
    Required,
    Forbidden,
    Collider,
    /// Known non-collider.
    R1,
    /// Cycle avoidance.
    R2,
    R3,
    R4,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Tier => "tier",
            Rule::Required => "required",
            Rule::Forbidden => "forbidden",
            Rule::Collider => "collider",
            Rule::R1 => "R1",
            Rule::R2 => "R2",
            Rule::R3 => "R3",
            Rule::R4 => "R4",
        }
    }
}

impl FromStr for Rule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "tier" => Rule::Tier,
            "required" => Rule::Required,
            "forbidden" => Rule::Forbidden,
            "collider" => Rule::Collider,
            "R1" => Rule::R1,
            "R2" => Rule::R2,
            "R3" => Rule::R3,
            "R4" => Rule::R4,
            _ => return Err(format!("unknown rule `{s}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Applied,
    Skipped,
}

/// One orientation decision.
///
/// `nodes` is `[from, to]` for single edges and `[x, z, y]` for colliders.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrientationRecord {
    pub action: Action,
    pub rule: Rule,
    pub nodes: Vec<usize>,
    pub note: String,
}

impl fmt::Display for OrientationRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let action = match self.action {
            Action::Applied => "applied",
            Action::Skipped => "skipped",
        };
        let nodes: Vec<String> = self.nodes.iter().map(usize::to_string).collect();
        write!(f, "{action}\t{}\t{}\t{}", self.rule.as_str(), nodes.join(","), self.note)
    }
}

impl FromStr for OrientationRecord {
    type Err = String;
    fn from_str(line: &str) -> Result<Self, String> {
        let mut parts = line.splitn(4, '\t');
        let action = match parts.next() {
            Some("applied") => Action::Applied,
            Some("skipped") => Action::Skipped,
            other => return Err(format!("bad action {other:?}")),
        };
        let rule = parts.next().ok_or("missing rule")?.parse()?;
        let nodes = parts
            .next()
            .ok_or("missing nodes")?
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<usize>().map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        let note = parts.next().unwrap_or("").to_string();
        Ok(Self { action, rule, nodes, note })
    }
}

/// Ordered record of every orientation applied or skipped during phase II.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrientationLog {
    records: Vec<OrientationRecord>,
}

impl OrientationLog {
    pub fn applied(&mut self, rule: Rule, nodes: Vec<usize>, note: impl Into<String>) {
        self.records.push(OrientationRecord {
            action: Action::Applied,
            rule,
            nodes,
            note: note.into(),
        });
    }

    pub fn skipped(&mut self, rule: Rule, nodes: Vec<usize>, note: impl Into<String>) {
        self.records.push(OrientationRecord {
            action: Action::Skipped,
            rule,
            nodes,
            note: note.into(),
        });
    }

    pub fn records(&self) -> &[OrientationRecord] {
        &self.records
    }

    pub fn skips(&self) -> impl Iterator<Item = &OrientationRecord> {
        self.records.iter().filter(|r| r.action == Action::Skipped)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub(crate) fn clear(&mut self) {
        self.records.clear();
    }

    /// One tab-separated line per record: action, rule, nodes, note.
    pub fn to_text(&self) -> String {
        self.records.iter().map(|r| format!("{r}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::parse)
            .collect::<Result<_, _>>()?;
        Ok(Self { records })
    }
}
