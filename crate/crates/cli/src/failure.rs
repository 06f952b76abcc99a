use lacewalk::Error;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Everything that ends a run with a nonzero status.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Usage(String),
    Io(String),
    Module(Error),
    /// Report sections that failed, by name; the report itself was written.
    Sections(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Module(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) | Failure::Io(_) => EXIT_USAGE,
            Failure::Sections(_) => EXIT_VERIFICATION,
            Failure::Module(e) => match e {
                Error::InvalidArgument(_) | Error::Mismatch(_) | Error::Precondition(_) | Error::Format(_) => EXIT_USAGE,
                Error::WorkLimit { .. } => EXIT_RESOURCE,
                Error::Verification { .. } | Error::Numeric { .. } | Error::Degenerate(_) | Error::Internal(_) => {
                    EXIT_VERIFICATION
                }
            },
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": error_object(self) })
    }
}

pub fn error_object(f: &Failure) -> Value {
    match f {
        Failure::Usage(m) => json!({ "kind": "usage", "message": m }),
        Failure::Io(m) => json!({ "kind": "io", "message": m }),
        Failure::Sections(names) => json!({ "kind": "sections_failed", "message": format!("failed sections: {}", names.join(", ")), "sections": names }),
        Failure::Module(e) => module_error(e),
    }
}

pub fn module_error(e: &Error) -> Value {
    let mut v = json!({ "kind": e.kind(), "message": e.to_string() });
    match e {
        Error::Verification { order, point, lhs, rhs } => {
            v["order"] = json!(order);
            v["x"] = json!(point.coords());
            v["lhs"] = json!(lhs);
            v["rhs"] = json!(rhs);
        }
        Error::WorkLimit { estimated, limit } => {
            v["estimated"] = json!(estimated.to_string());
            v["limit"] = json!(limit.to_string());
        }
        Error::Numeric { achieved, .. } => {
            v["achieved"] = json!(achieved);
        }
        _ => {}
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use lacewalk::LatticePoint;

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::Usage("x".into()).exit_code(), 2);
        assert_eq!(Failure::Module(Error::WorkLimit { estimated: 10, limit: 1 }).exit_code(), 3);
        let v = Error::Verification { order: 5, point: LatticePoint::new(&[2, 1]).unwrap(), lhs: "1".into(), rhs: "2".into() };
        let f = Failure::Module(v);
        assert_eq!(f.exit_code(), 1);
        let j = f.to_json();
        assert_eq!(j["error"]["order"], 5);
        assert_eq!(j["error"]["x"], json!([2, 1]));
    }
}
