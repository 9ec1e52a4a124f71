//! Text instance files.
//!
//! ```text
//! N M G K
//! <1-based indices of group 1>
//! ...
//! <1-based indices of group M>
//! [w_1 ... w_N]            (optional)
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use super::{GroupModel, ModelError, NormMode, WeightVector};

#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Model { line: usize, source: ModelError },
}

/// A parsed instance file.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub model: GroupModel,
    pub weights: Option<WeightVector>,
}

fn syntax(line: usize, message: impl Into<String>) -> InstanceError {
    InstanceError::Syntax { line, message: message.into() }
}

fn parse_numbers<T: std::str::FromStr>(text: &str, line: usize, what: &str) -> Result<Vec<T>, InstanceError> {
    text.split_whitespace()
        .map(|tok| tok.parse::<T>().map_err(|_| syntax(line, format!("invalid {what} '{tok}'"))))
        .collect()
}

pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let lines: Vec<&str> = text.lines().collect();
    // ignore trailing blank lines only
    let mut end = lines.len();
    while end > 0 && lines[end - 1].trim().is_empty() {
        end -= 1;
    }
    let lines = &lines[..end];
    let header = lines.first().ok_or_else(|| syntax(1, "missing header 'N M G K'"))?;
    let head: Vec<usize> = parse_numbers(header, 1, "header field")?;
    if head.len() != 4 {
        return Err(syntax(1, format!("header needs 4 fields 'N M G K', found {}", head.len())));
    }
    let (n, m, g, k) = (head[0], head[1], head[2], head[3]);
    if lines.len() < m + 1 {
        return Err(syntax(lines.len() + 1, format!("expected {m} group lines, found {}", lines.len() - 1)));
    }
    if lines.len() > m + 2 {
        return Err(syntax(m + 3, "unexpected content after the weight line"));
    }
    let mut groups = Vec::with_capacity(m);
    for j in 0..m {
        let line = j + 2;
        let idx: Vec<usize> = parse_numbers(lines[j + 1], line, "index")?;
        if idx.is_empty() {
            return Err(syntax(line, "group is empty"));
        }
        let mut group = Vec::with_capacity(idx.len());
        for i in idx {
            if i == 0 || i > n {
                return Err(syntax(line, format!("index {i} outside 1..={n}")));
            }
            group.push(i - 1);
        }
        groups.push(group);
    }
    let model = GroupModel::new(n, groups, g, k).map_err(|source| InstanceError::Model { line: 1, source })?;
    let weights = if lines.len() == m + 2 {
        let line = m + 2;
        let w: Vec<f64> = parse_numbers(lines[m + 1], line, "weight")?;
        if w.len() != n {
            return Err(syntax(line, format!("expected {n} weights, found {}", w.len())));
        }
        Some(WeightVector::new(w, NormMode::L2).map_err(|source| InstanceError::Model { line, source })?)
    } else {
        None
    };
    Ok(Instance { model, weights })
}

pub fn write_instance(model: &GroupModel, weights: Option<&WeightVector>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} {} {}",
        model.ground_size(),
        model.num_groups(),
        model.budget(),
        model.sparsity()
    );
    for g in model.groups() {
        let line: Vec<String> = g.iter().map(|i| (i + 1).to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    if let Some(w) = weights {
        let line: Vec<String> = w.as_slice().iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const FOUR_GROUPS: &str = "4 4 1 4\n1 2\n1 2 3\n2 4\n3 4\n4 1 2 9\n";

    #[test]
    fn parses_four_groups() {
        let inst = parse_instance(FOUR_GROUPS).unwrap();
        assert_eq!(inst.model.num_groups(), 4);
        assert_eq!(inst.model.group(1), &[0, 1, 2]);
        assert_eq!(inst.weights.unwrap().as_slice(), &[4.0, 1.0, 2.0, 9.0]);
    }

    #[test]
    fn round_trip() {
        let inst = parse_instance(FOUR_GROUPS).unwrap();
        let text = write_instance(&inst.model, inst.weights.as_ref());
        assert_eq!(text, FOUR_GROUPS);
    }

    #[test]
    fn weights_optional() {
        let inst = parse_instance("2 1 1 2\n1 2\n").unwrap();
        assert!(inst.weights.is_none());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_instance("4 4 1 4\n1 2\n1 x 3\n2 4\n3 4\n").unwrap_err();
        assert!(matches!(err, InstanceError::Syntax { line: 3, .. }), "{err}");
        let err = parse_instance("4 4 1\n").unwrap_err();
        assert!(matches!(err, InstanceError::Syntax { line: 1, .. }));
        let err = parse_instance("4 2 1 4\n1 2\n3 9\n").unwrap_err();
        assert!(matches!(err, InstanceError::Syntax { line: 3, .. }));
        let err = parse_instance("4 2 1 4\n1 2\n3 4\n1 2\n").unwrap_err();
        assert!(matches!(err, InstanceError::Syntax { line: 4, .. }));
        let err = parse_instance("3 1 1 3\n1 2\n").unwrap_err();
        assert!(matches!(err, InstanceError::Model { source: ModelError::Uncovered(2), .. }));
        let err = parse_instance("2 1 1 2\n1 2\n1 -1\n").unwrap_err();
        assert!(matches!(err, InstanceError::Model { line: 3, .. }));
    }
}
