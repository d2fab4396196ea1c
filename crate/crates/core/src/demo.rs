//! Synthetic assembly-line data: stations in sequence, each measuring a few
//! underlying quantities through several near-duplicate sensors.

use std::collections::BTreeMap;

use crate::graph::PartialDag;
use crate::io::write_delimited;
use crate::synth::{random_network, sample, GaussianBn, NetworkSpec, NodeModel, SynthError};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoSpec {
    pub stations: usize,
    pub features_per_station: usize,
    /// Extra sensors per underlying quantity.
    pub copies: usize,
    /// Noise standard deviation of each copy around its quantity.
    pub jitter: f64,
    pub mean_degree: f64,
    pub rows: usize,
}

impl Default for DemoSpec {
    fn default() -> Self {
        Self { stations: 4, features_per_station: 5, copies: 2, jitter: 0.1, mean_degree: 2.0, rows: 5000 }
    }
}

#[derive(Debug, Clone)]
pub struct Demo<F> {
    /// Generating model over all sensor columns.
    pub bn: GaussianBn<F>,
    /// Station index per column name.
    pub tiers: BTreeMap<String, u32>,
    /// Number of underlying quantities (a natural cluster count).
    pub groups: usize,
    /// Sampled table with a `part_id` key and a constant `line` column in
    /// front, as a line-of-production export would have.
    pub csv: String,
}

pub fn demo<F: Scalar>(spec: &DemoSpec, seed: u64) -> Result<Demo<F>, SynthError> {
    if spec.stations == 0 || spec.features_per_station == 0 || spec.rows < 4 {
        return Err(SynthError::Settings("need stations, features and at least 4 rows".into()));
    }
    let nb = spec.stations * spec.features_per_station;
    let base = random_network::<F>(
        &NetworkSpec { nodes: nb, mean_degree: spec.mean_degree, tiers: spec.stations, ..Default::default() },
        seed,
    )?;
    let per = 1 + spec.copies;
    let total = nb * per;
    let mut names = Vec::with_capacity(total);
    let mut tiers = BTreeMap::new();
    for v in 0..nb {
        let station = base.tiers[v].unwrap_or(0);
        for c in 0..per {
            let name = if c == 0 { format!("s{station}_q{v}") } else { format!("s{station}_q{v}_{c}") };
            tiers.insert(name.clone(), station);
            names.push(name);
        }
    }
    let id = |v: usize, c: usize| v * per + c;
    let mut arcs = Vec::new();
    let mut nodes = Vec::with_capacity(total);
    for v in 0..nb {
        let m = base.bn.node(v);
        arcs.extend(m.parents.iter().map(|&p| (id(p, 0), id(v, 0))));
        nodes.push(NodeModel {
            parents: m.parents.iter().map(|&p| id(p, 0)).collect(),
            coefs: m.coefs.clone(),
            intercept: m.intercept,
            noise_std: m.noise_std,
        });
        for c in 1..per {
            arcs.push((id(v, 0), id(v, c)));
            nodes.push(NodeModel {
                parents: vec![id(v, 0)],
                coefs: vec![F::one()],
                intercept: F::zero(),
                noise_std: F::lit(spec.jitter),
            });
        }
    }
    let mut dag = PartialDag::from_directed(total, &arcs).expect("copies hang off an acyclic base");
    dag.set_labels(names).expect("one name per node");
    let bn = GaussianBn::new(dag, nodes)?;

    let data = sample(&bn, spec.rows, seed);
    let body = write_delimited(&data, b',');
    let mut csv = String::with_capacity(body.len() + spec.rows * 12);
    for (i, line) in body.lines().enumerate() {
        if i == 0 {
            csv.push_str("part_id,line,");
        } else {
            csv.push_str(&format!("{},7,", 100_000 + i));
        }
        csv.push_str(line);
        csv.push('\n');
    }
    Ok(Demo { bn, tiers, groups: nb, csv })
}
