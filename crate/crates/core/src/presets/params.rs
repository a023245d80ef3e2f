use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// String-valued preset parameters, as given on the command line (`k=v,k=v`) or in a spec file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params {
    map: BTreeMap<String, String>,
}

impl Params {
    pub fn new() -> Self {
        Params::default()
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut p = Params::new();
        for part in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::parse("params", format!("expected key=value, found '{part}'")))?;
            p.set(k.trim(), v.trim());
        }
        Ok(p)
    }

    pub fn set(&mut self, k: &str, v: &str) -> &mut Self {
        self.map.insert(k.to_string(), v.to_string());
        self
    }

    pub fn with(mut self, k: &str, v: impl ToString) -> Self {
        self.set(k, &v.to_string());
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Rejects keys outside `allowed`.
    pub fn expect_only(&self, preset: &str, allowed: &[&str]) -> Result<()> {
        for k in self.map.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::ParamOutOfRange {
                    param: k.clone(),
                    value: self.map[k].clone(),
                    range: format!("parameters of '{preset}': {}", allowed.join(", ")),
                });
            }
        }
        Ok(())
    }

    pub fn f64_in(&self, k: &str, default: f64, lo: f64, hi: f64) -> Result<f64> {
        let v = match self.map.get(k) {
            None => default,
            Some(s) => s
                .parse::<f64>()
                .map_err(|_| Error::ParamOutOfRange { param: k.into(), value: s.clone(), range: "a real number".into() })?,
        };
        if !(v >= lo && v <= hi) {
            return Err(Error::ParamOutOfRange { param: k.into(), value: v.to_string(), range: format!("[{lo}, {hi}]") });
        }
        Ok(v)
    }

    pub fn choice<'a>(&'a self, k: &str, default: &'a str, options: &[&str]) -> Result<&'a str> {
        let v = self.map.get(k).map(String::as_str).unwrap_or(default);
        if !options.contains(&v) {
            return Err(Error::ParamOutOfRange { param: k.into(), value: v.into(), range: format!("one of {}", options.join("|")) });
        }
        Ok(v)
    }

    pub fn flag(&self, k: &str, default: bool) -> Result<bool> {
        match self.map.get(k).map(String::as_str) {
            None => Ok(default),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => Err(Error::ParamOutOfRange { param: k.into(), value: v.into(), range: "true|false".into() }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs() {
        let p = Params::parse("xmin=1.0, xmax=2").unwrap();
        assert_eq!(p.f64_in("xmin", 0.0, 0.0, 5.0).unwrap(), 1.0);
        assert_eq!(p.f64_in("xmax", 0.0, 0.0, 5.0).unwrap(), 2.0);
        assert_eq!(p.f64_in("other", 0.5, 0.0, 5.0).unwrap(), 0.5);
        assert!(p.f64_in("xmax", 0.0, 0.0, 1.0).is_err());
        assert!(Params::parse("novalue").is_err());
        assert!(p.expect_only("contest", &["xmin"]).is_err());
    }
}
