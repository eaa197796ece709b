use serde::{Deserialize, Serialize};

/// Outcome of a check. `Inconclusive` is never upgraded to `Pass`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    /// Conjunction: any failure fails, otherwise any inconclusive item keeps
    /// the whole inconclusive.
    pub fn and(self, other: Status) -> Status {
        match (self, other) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Pass,
        }
    }

    pub fn all(items: impl IntoIterator<Item = Status>) -> Status {
        items.into_iter().fold(Status::Pass, Status::and)
    }

    pub fn is_pass(self) -> bool {
        self == Status::Pass
    }

    /// Process exit code: 0 pass, 1 fail, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::Status::*;
    use super::*;

    #[test]
    fn conjunction() {
        assert_eq!(Status::all([Pass, Pass]), Pass);
        assert_eq!(Status::all([Pass, Inconclusive]), Inconclusive);
        assert_eq!(Status::all([Inconclusive, Fail]), Fail);
        assert_eq!(Status::all([]), Pass);
    }
}
