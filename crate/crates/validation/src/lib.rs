//! One-line-per-criterion reporting for the acceptance run.

use std::fmt::Display;

#[derive(Debug, Default)]
pub struct Report {
    failed: Vec<u32>,
}

impl Report {
    /// Prints `PASS criterion n: ...` or `FAIL criterion n: ...`.
    pub fn record(&mut self, criterion: u32, pass: bool, detail: impl Display) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {criterion}: {detail}");
        if !pass {
            self.failed.push(criterion);
        }
    }

    /// Extra measurement attached to a criterion; does not affect the verdict.
    pub fn note(&self, criterion: u32, detail: impl Display) {
        println!("     criterion {criterion} note: {detail}");
    }

    pub fn failed(&self) -> &[u32] {
        &self.failed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collects_failures() {
        let mut r = Report::default();
        r.record(1, true, "ok");
        r.record(2, false, "bad");
        r.record(3, false, "bad");
        assert_eq!(r.failed(), &[2, 3]);
    }
}
