//! Named example webs with the sample boxes they are studied on.

use crate::error::Result;
use crate::expr::{parse, SampleBox, SampleConfig};
use crate::web::WebSpec;

/// A named web: its functions as source text and its sample box.
#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub functions: &'static [&'static str],
    pub domain: (f64, f64, f64, f64),
}

impl Fixture {
    pub fn sample_box(&self) -> SampleBox {
        let (a, b, c, d) = self.domain;
        SampleBox::new(a, b, c, d).expect("fixture boxes are valid")
    }

    /// Build the web with the default sampling settings.
    pub fn web(&self) -> Result<WebSpec> {
        self.web_with(&SampleConfig::new(self.sample_box()))
    }

    /// Build the web with `cfg`, replacing its domain by the fixture box.
    pub fn web_with(&self, cfg: &SampleConfig) -> Result<WebSpec> {
        let functions = self
            .functions
            .iter()
            .map(|s| parse(s).expect("fixture functions parse"))
            .collect();
        crate::web::make_web(functions, self.sample_box(), cfg)
    }
}

const UNIT: (f64, f64, f64, f64) = (1.0, 2.0, 1.0, 2.0);
const FAR: (f64, f64, f64, f64) = (2.0, 3.0, 4.0, 5.0);
const NARROW: (f64, f64, f64, f64) = (2.0, 3.0, 0.5, 1.0);

pub const W3_PAR: Fixture = Fixture {
    name: "W3-PAR",
    functions: &["x", "y", "x + y"],
    domain: UNIT,
};
pub const W4_PAR: Fixture = Fixture {
    name: "W4-PAR",
    functions: &["x", "y", "x + y", "x + 2*y"],
    domain: UNIT,
};
pub const W4_R3: Fixture = Fixture {
    name: "W4-R3",
    functions: &["x", "y", "x + y", "x*y"],
    domain: FAR,
};
pub const W4_R2: Fixture = Fixture {
    name: "W4-R2",
    functions: &["x", "y", "x + y", "x^2 + y^2"],
    domain: FAR,
};
pub const W4_R1: Fixture = Fixture {
    name: "W4-R1",
    functions: &["x", "y", "(x - y)^2/x", "(x - y)^2/y"],
    domain: NARROW,
};
pub const W4_R0: Fixture = Fixture {
    name: "W4-R0",
    functions: &["x", "y", "(x + y)*exp(x)", "x*y"],
    domain: UNIT,
};
pub const W4_R2NL: Fixture = Fixture {
    name: "W4-R2NL",
    functions: &["x", "y", "x/y", "x*y*(x + y)"],
    domain: FAR,
};
pub const W4_R1NL: Fixture = Fixture {
    name: "W4-R1NL",
    functions: &["x", "y", "x*y^2/(x - y)^2", "x^2*y/(x - y)^2"],
    domain: NARROW,
};
pub const W5_BOL: Fixture = Fixture {
    name: "W5-BOL",
    functions: &["x", "y", "x/y", "(1 - y)/(1 - x)", "(x - x*y)/(y - x*y)"],
    domain: FAR,
};

pub const ALL: [Fixture; 9] = [
    W3_PAR, W4_PAR, W4_R3, W4_R2, W4_R1, W4_R0, W4_R2NL, W4_R1NL, W5_BOL,
];

pub fn by_name(name: &str) -> Option<Fixture> {
    ALL.iter().copied().find(|f| f.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_fixtures_build() {
        for f in ALL {
            let w = f.web().unwrap();
            assert_eq!(w.d(), f.functions.len(), "{}", f.name);
        }
        assert_eq!(by_name("w4-r3").unwrap().name, "W4-R3");
    }
}
