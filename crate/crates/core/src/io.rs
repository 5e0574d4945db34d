//! Model files, value-function files, contribution tables, belief sets and
//! tradeoff CSVs.
//!
//! Locations and sensors are numbered from 1 in every file.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::belief::Belief;
use crate::error::{Error, Result};
use crate::model::{even_positions, lazy_walk, ActionMask, NetworkModel, SensingSpec};
use crate::pointbased::{AlphaVector, ValueFunction};
use crate::qmdp::ContributionMatrix;
use crate::sim::TradeoffPoint;

pub const DEFAULT_Q: f64 = 0.9;
pub const DEFAULT_SIGMA: f64 = 1.0;
pub const DEFAULT_STAY: f64 = 0.5;

pub const CSV_HEADER: &str = "policy,c,active_per_step,tracking_per_step,total_cost,episodes";
const VALUEFN_TAG: &str = "valuefn";
const BELIEFS_TAG: &str = "beliefs";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub sensing: SensingConfig,
    pub transition: TransitionConfig,
    pub c_default: f64,
    /// 1-based start location; the middle of the network when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensingConfig {
    pub kind: String,
    /// Per sensor, the 1-based locations it covers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// Sensor coordinates on the location axis (locations sit at 1..=m).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionConfig {
    pub kind: String,
    /// `m` or `m + 1` rows of `m + 1` entries, exit state last. The exit row
    /// may be omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit_at_boundary: Option<bool>,
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

/// Line on which row `row` (0-based) of the `"matrix"` array starts.
fn matrix_row_line(text: &str, row: usize) -> usize {
    let Some(start) = text.find("\"matrix\"") else {
        return 0;
    };
    let mut line = 1 + text[..start].matches('\n').count();
    let mut depth = 0;
    let mut rows_seen = 0;
    for ch in text[start..].chars() {
        match ch {
            '\n' => line += 1,
            '[' => {
                depth += 1;
                if depth == 2 {
                    if rows_seen == row {
                        return line;
                    }
                    rows_seen += 1;
                }
            }
            ']' => {
                depth -= 1;
                if depth == 0 {
                    break;
                }
            }
            _ => {}
        }
    }
    0
}

impl ModelConfig {
    pub fn build(&self) -> Result<NetworkModel> {
        self.build_with_text(None)
    }

    fn build_with_text(&self, text: Option<&str>) -> Result<NetworkModel> {
        let (n, m) = (self.n, self.m);
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter("n and m must be positive".into()));
        }
        let row_err = |row: usize, reason: String| {
            parse_err(text.map_or(0, |t| matrix_row_line(t, row)), format!("transition row {}: {reason}", row + 1))
        };
        let transition = match self.transition.kind.as_str() {
            "lazy_walk" => {
                let stay = self.transition.stay.unwrap_or(DEFAULT_STAY);
                if !(0.0..1.0).contains(&stay) {
                    return Err(Error::InvalidParameter(format!("stay must be in [0, 1), got {stay}")));
                }
                lazy_walk(m, stay, self.transition.exit_at_boundary.unwrap_or(true))
            }
            "explicit" => {
                let mut rows = self
                    .transition
                    .matrix
                    .clone()
                    .ok_or_else(|| Error::InvalidParameter("explicit transition needs a matrix".into()))?;
                if rows.len() == m {
                    let mut exit = vec![0.0; m + 1];
                    exit[m] = 1.0;
                    rows.push(exit);
                }
                if rows.len() != m + 1 {
                    return Err(parse_err(0, format!("transition matrix has {} rows, expected {m} or {}", rows.len(), m + 1)));
                }
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != m + 1 {
                        return Err(row_err(i, format!("{} entries, expected {}", row.len(), m + 1)));
                    }
                    if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                        return Err(row_err(i, "entries must be finite and nonnegative".into()));
                    }
                    let s: f64 = row.iter().sum();
                    if (s - 1.0).abs() > 1e-9 {
                        return Err(row_err(i, format!("sums to {s}, not 1")));
                    }
                }
                rows
            }
            other => return Err(Error::InvalidParameter(format!("unknown transition kind `{other}`"))),
        };

        let regions = || -> Result<Vec<Vec<usize>>> {
            let regions = self
                .sensing
                .regions
                .as_ref()
                .ok_or_else(|| Error::InvalidSensing("overlap sensing needs regions".into()))?;
            regions
                .iter()
                .enumerate()
                .map(|(l, r)| {
                    r.iter()
                        .map(|&loc| {
                            if loc == 0 || loc > m {
                                Err(Error::InvalidSensing(format!(
                                    "sensor {} covers location {loc} outside 1..={m}",
                                    l + 1
                                )))
                            } else {
                                Ok(loc - 1)
                            }
                        })
                        .collect()
                })
                .collect()
        };
        let sensing = match self.sensing.kind.as_str() {
            "simple" => SensingSpec::Simple,
            "overlap_deterministic" => SensingSpec::OverlapDeterministic { regions: regions()? },
            "overlap_probabilistic" => SensingSpec::OverlapProbabilistic {
                regions: regions()?,
                q: self.sensing.q.unwrap_or(DEFAULT_Q),
            },
            "continuous_gaussian" => SensingSpec::ContinuousGaussian {
                positions: self.sensing.positions.clone().unwrap_or_else(|| even_positions(n, m)),
                sigma: self.sensing.sigma.unwrap_or(DEFAULT_SIGMA),
            },
            other => return Err(Error::InvalidSensing(format!("unknown sensing kind `{other}`"))),
        };
        let model = NetworkModel::new(self.name.clone(), n, transition, sensing, self.c_default)?;
        if model.states() != m {
            return Err(Error::DimensionMismatch(format!("model has {} locations, config says {m}", model.states())));
        }
        match self.start {
            None => Ok(model),
            Some(s) if s >= 1 && s <= m => model.with_start(s - 1),
            Some(s) => Err(Error::InvalidParameter(format!("start {s} outside 1..={m}"))),
        }
    }

    /// Config describing `model` with an explicit transition matrix.
    pub fn from_model(model: &NetworkModel) -> Self {
        let one_based = |regions: &[Vec<usize>]| -> Vec<Vec<usize>> {
            regions.iter().map(|r| r.iter().map(|i| i + 1).collect()).collect()
        };
        let sensing = match model.sensing() {
            SensingSpec::Simple => SensingConfig {
                kind: "simple".into(),
                regions: None,
                q: None,
                positions: None,
                sigma: None,
            },
            SensingSpec::OverlapDeterministic { regions } => SensingConfig {
                kind: "overlap_deterministic".into(),
                regions: Some(one_based(regions)),
                q: None,
                positions: None,
                sigma: None,
            },
            SensingSpec::OverlapProbabilistic { regions, q } => SensingConfig {
                kind: "overlap_probabilistic".into(),
                regions: Some(one_based(regions)),
                q: Some(*q),
                positions: None,
                sigma: None,
            },
            SensingSpec::ContinuousGaussian { positions, sigma } => SensingConfig {
                kind: "continuous_gaussian".into(),
                regions: None,
                q: None,
                positions: Some(positions.clone()),
                sigma: Some(*sigma),
            },
        };
        Self {
            name: model.name().to_string(),
            n: model.sensors(),
            m: model.states(),
            sensing,
            transition: TransitionConfig {
                kind: "explicit".into(),
                matrix: Some(model.transition_rows()),
                stay: None,
                exit_at_boundary: None,
            },
            c_default: model.c(),
            start: Some(model.start() + 1),
        }
    }
}

pub fn parse_model(text: &str) -> Result<NetworkModel> {
    let config: ModelConfig =
        serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
    config.build_with_text(Some(text))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<NetworkModel> {
    parse_model(&fs::read_to_string(path)?)
}

pub fn save_model(model: &NetworkModel, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&ModelConfig::from_model(model))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Header `valuefn n m count`, then per alpha `m + 1` values and the action
/// as a hex mask. Values are printed in shortest round-trip form.
pub fn valuefn_to_string(vf: &ValueFunction) -> String {
    let mut out = format!("{VALUEFN_TAG} {} {} {}\n", vf.sensors(), vf.states(), vf.len());
    for alpha in vf.alphas() {
        for v in &alpha.values {
            let _ = write!(out, "{v} ");
        }
        out.push_str(&alpha.action.to_hex());
        out.push('\n');
    }
    out
}

fn parse_header(line: Option<(usize, &str)>, tag: &str, fields: usize) -> Result<Vec<usize>> {
    let (_, line) = line.ok_or_else(|| parse_err(1, "empty file"))?;
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some(tag) {
        return Err(parse_err(1, format!("expected `{tag}` header")));
    }
    let values: Vec<usize> = tokens
        .map(|t| t.parse().map_err(|_| parse_err(1, format!("bad header field `{t}`"))))
        .collect::<Result<_>>()?;
    if values.len() != fields {
        return Err(parse_err(1, format!("header needs {fields} fields")));
    }
    Ok(values)
}

fn parse_reals<'a>(tokens: impl Iterator<Item = &'a str>, line: usize) -> Result<Vec<f64>> {
    tokens
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("bad number `{t}`")))
        })
        .collect()
}

pub fn parse_valuefn(text: &str) -> Result<ValueFunction> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let header = parse_header(lines.next(), VALUEFN_TAG, 3)?;
    let (n, m, count) = (header[0], header[1], header[2]);
    let mut alphas = Vec::with_capacity(count);
    for (line_no, line) in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != m + 2 {
            return Err(parse_err(line_no, format!("expected {} fields, found {}", m + 2, tokens.len())));
        }
        let values = parse_reals(tokens[..m + 1].iter().copied(), line_no)?;
        let action = ActionMask::from_hex(tokens[m + 1], n)
            .ok_or_else(|| parse_err(line_no, format!("bad action mask `{}`", tokens[m + 1])))?;
        alphas.push(AlphaVector { values, action });
    }
    if alphas.len() != count {
        return Err(parse_err(0, format!("header announces {count} alphas, found {}", alphas.len())));
    }
    ValueFunction::new(alphas)
}

pub fn save_valuefn(vf: &ValueFunction, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, valuefn_to_string(vf))?;
    Ok(())
}

pub fn load_valuefn(path: impl AsRef<Path>) -> Result<ValueFunction> {
    parse_valuefn(&fs::read_to_string(path)?)
}

/// Rows are locations, columns sensors, with a `state,sensor_1,...` header.
pub fn contributions_to_csv(t: &ContributionMatrix) -> String {
    let mut out = String::from("state");
    for l in 1..=t.sensors() {
        let _ = write!(out, ",sensor_{l}");
    }
    out.push('\n');
    for (i, row) in t.t.iter().enumerate() {
        let _ = write!(out, "{}", i + 1);
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// The sample count is not stored and reads back as 0.
pub fn parse_contributions(text: &str) -> Result<ContributionMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let columns: Vec<&str> = header.trim().split(',').collect();
    if columns.first() != Some(&"state") || columns.len() < 2 {
        return Err(parse_err(1, "expected `state,sensor_1,...` header"));
    }
    let n = columns.len() - 1;
    let mut t = Vec::new();
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != n + 1 {
            return Err(parse_err(line_no, format!("expected {} fields, found {}", n + 1, fields.len())));
        }
        if fields[0].parse::<usize>().ok() != Some(t.len() + 1) {
            return Err(parse_err(line_no, format!("expected state {}", t.len() + 1)));
        }
        let row = parse_reals(fields[1..].iter().copied(), line_no)?;
        if row.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(parse_err(line_no, "contributions must lie in [0, 1]"));
        }
        t.push(row);
    }
    if t.is_empty() {
        return Err(parse_err(2, "no rows"));
    }
    Ok(ContributionMatrix {
        t,
        samples_per_entry: 0,
    })
}

pub fn save_contributions(t: &ContributionMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, contributions_to_csv(t))?;
    Ok(())
}

pub fn load_contributions(path: impl AsRef<Path>) -> Result<ContributionMatrix> {
    parse_contributions(&fs::read_to_string(path)?)
}

/// Header `beliefs m count`, then `m + 1` masses per line (exit last).
pub fn beliefs_to_string(beliefs: &[Belief]) -> String {
    let m = beliefs.first().map_or(0, Belief::states);
    let mut out = format!("{BELIEFS_TAG} {m} {}\n", beliefs.len());
    for b in beliefs {
        let line: Vec<String> = b.mass().iter().map(|p| p.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_beliefs(text: &str) -> Result<Vec<Belief>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let header = parse_header(lines.next(), BELIEFS_TAG, 2)?;
    let (m, count) = (header[0], header[1]);
    let mut out = Vec::with_capacity(count);
    for (line_no, line) in lines {
        let mass = parse_reals(line.split_whitespace(), line_no)?;
        if mass.len() != m + 1 {
            return Err(parse_err(line_no, format!("expected {} masses, found {}", m + 1, mass.len())));
        }
        out.push(Belief::from_mass(mass).map_err(|e| parse_err(line_no, e.to_string()))?);
    }
    if out.len() != count {
        return Err(parse_err(0, format!("header announces {count} beliefs, found {}", out.len())));
    }
    Ok(out)
}

pub fn save_beliefs(beliefs: &[Belief], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, beliefs_to_string(beliefs))?;
    Ok(())
}

pub fn load_beliefs(path: impl AsRef<Path>) -> Result<Vec<Belief>> {
    parse_beliefs(&fs::read_to_string(path)?)
}

pub fn points_to_csv(points: &[TradeoffPoint]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.policy, p.c, p.active_per_step, p.tracking_per_step, p.total_cost, p.episodes
        );
    }
    out
}

pub fn write_csv(points: &[TradeoffPoint], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, points_to_csv(points))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const WALK: &str = r#"{
  "name": "walk",
  "n": 3,
  "m": 3,
  "sensing": { "kind": "simple" },
  "transition": { "kind": "lazy_walk", "stay": 0.5, "exit_at_boundary": true },
  "c_default": 0.2
}"#;

    #[test]
    fn lazy_walk_config() {
        let model = parse_model(WALK).unwrap();
        assert_eq!(model.states(), 3);
        assert_eq!(model.start(), 1);
        assert_eq!(model.prob(0, 3), 0.25);
        let again = ModelConfig::from_model(&model).build().unwrap();
        assert_eq!(again.transition_rows(), model.transition_rows());
        assert_eq!(again.start(), model.start());
    }

    #[test]
    fn malformed_row_is_named() {
        let text = r#"{
  "name": "bad",
  "n": 2,
  "m": 2,
  "sensing": { "kind": "simple" },
  "transition": {
    "kind": "explicit",
    "matrix": [
      [0.5, 0.5, 0.0],
      [0.2, 0.2],
      [0.0, 0.0, 1.0]
    ]
  },
  "c_default": 0.2
}"#;
        match parse_model(text) {
            Err(Error::Parse { line, reason }) => {
                assert_eq!(line, 10);
                assert!(reason.contains("row 2"), "{reason}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn overlap_regions_are_one_based() {
        let text = r#"{"name":"o","n":2,"m":3,
            "sensing":{"kind":"overlap_probabilistic","regions":[[1,2],[2,3]]},
            "transition":{"kind":"lazy_walk"},"c_default":0.1,"start":1}"#;
        let model = parse_model(text).unwrap();
        assert!(model.sensor_covers(0, 0) && model.sensor_covers(0, 1) && !model.sensor_covers(0, 2));
        assert_eq!(model.start(), 0);
        match model.sensing() {
            SensingSpec::OverlapProbabilistic { q, .. } => assert_eq!(*q, DEFAULT_Q),
            _ => unreachable!(),
        }
        let bad = text.replace("[2,3]", "[2,4]");
        assert!(matches!(parse_model(&bad), Err(Error::InvalidSensing(_))));
    }

    #[test]
    fn valuefn_round_trip_is_bitwise() {
        let vf = ValueFunction::new(vec![
            AlphaVector {
                values: vec![0.1 + 0.2, 1.0 / 3.0, 1e-300, 0.0],
                action: ActionMask::from_active(5, &[0, 4]),
            },
            AlphaVector {
                values: vec![12345.678901234567, -0.0, 7.0, 0.0],
                action: ActionMask::all_asleep(5),
            },
        ])
        .unwrap();
        let back = parse_valuefn(&valuefn_to_string(&vf)).unwrap();
        for (a, b) in vf.alphas().iter().zip(back.alphas()) {
            assert_eq!(a.action, b.action);
            for (x, y) in a.values.iter().zip(&b.values) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        assert!(matches!(parse_valuefn("valuefn 5 3 1\n1 2 3\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn csv_has_header_plus_one_line_per_point() {
        let p = TradeoffPoint {
            policy: "qmdp".into(),
            c: 0.5,
            active_per_step: 1.0,
            tracking_per_step: 0.25,
            total_cost: 3.0,
            cost_stderr: 0.1,
            episodes: 10,
        };
        let csv = points_to_csv(&[p.clone(), p.clone(), p]);
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(csv.lines().nth(1).unwrap(), "qmdp,0.5,1,0.25,3,10");
    }

    #[test]
    fn contributions_and_beliefs_round_trip() {
        let t = ContributionMatrix {
            t: vec![vec![0.25, 0.5], vec![0.0, 1.0 / 3.0]],
            samples_per_entry: 7,
        };
        let back = parse_contributions(&contributions_to_csv(&t)).unwrap();
        assert_eq!(back.t, t.t);
        let beliefs = vec![Belief::point(2, 1), Belief::new(&[0.3, 0.7], 0.0).unwrap()];
        assert_eq!(parse_beliefs(&beliefs_to_string(&beliefs)).unwrap(), beliefs);
    }
}
