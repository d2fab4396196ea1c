use std::fmt::Display;

use causeway::io::IoError;

/// A failed run. Validation failures (bad flags, settings or input
/// contents) exit with 1, everything else with 2.
#[derive(Debug)]
pub enum Failure {
    Invalid(anyhow::Error),
    Runtime(anyhow::Error),
}

pub type Outcome<T> = Result<T, Failure>;

impl Failure {
    pub fn invalid(e: impl Into<anyhow::Error>) -> Self {
        Failure::Invalid(e.into())
    }

    pub fn invalid_msg(msg: impl Display) -> Self {
        Failure::Invalid(anyhow::anyhow!("{msg}"))
    }

    pub fn runtime(e: impl Into<anyhow::Error>) -> Self {
        Failure::Runtime(e.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Invalid(e) | Failure::Runtime(e) => e,
        }
    }

    fn context(self, ctx: String) -> Self {
        match self {
            Failure::Invalid(e) => Failure::Invalid(e.context(ctx)),
            Failure::Runtime(e) => Failure::Runtime(e.context(ctx)),
        }
    }
}

pub trait Context<T> {
    /// The error means the input or settings are unusable.
    fn invalid(self, ctx: impl Display) -> Outcome<T>;
    /// The error happened while doing otherwise valid work.
    fn runtime(self, ctx: impl Display) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Context<T> for Result<T, E> {
    fn invalid(self, ctx: impl Display) -> Outcome<T> {
        self.map_err(|e| Failure::invalid(e).context(ctx.to_string()))
    }

    fn runtime(self, ctx: impl Display) -> Outcome<T> {
        self.map_err(|e| Failure::runtime(e).context(ctx.to_string()))
    }
}

/// File-system trouble is a runtime failure; bad contents are invalid input.
pub fn classify_io(e: IoError, ctx: impl Display) -> Failure {
    let f = match e {
        IoError::File { .. } => Failure::runtime(e),
        other => Failure::invalid(other),
    };
    f.context(ctx.to_string())
}
