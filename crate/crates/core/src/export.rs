//! Solver-neutral text model of the constrained unit disk problem.
//!
//! The model minimizes the number of infeasible pairs `Σ γ_ij` over positions
//! `p_i ∈ [-50, 50]^N`, auxiliary squared distances `d2_i_j` and binaries
//! `γ_ij`. Per pair it emits two big-M constraints (edge or non-edge family)
//! plus one definitional constraint `d2_i_j = ‖p_i − p_j‖²`.
//!
//! # Format
//!
//! Line oriented, whitespace separated, `#` starts a comment line:
//!
//! ```text
//! udgp 1
//! dims <N>
//! var <name> continuous <lower> <upper>     # bounds may be -inf / inf
//! var <name> binary
//! minimize
//!   lin <coef> <var>
//! end
//! constraint <name> <le|ge|eq> <rhs>
//!   lin <coef> <var>
//!   quad <coef> <var> <var>
//! end
//! ```
//!
//! Each constraint reads `Σ terms <sense> rhs`. Numbers use the shortest
//! representation that parses back to the same `f64`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::layout::{Embedding, REGISTER_RADIUS};
use crate::physics::{check_dims, RegisterLimits};

const AXES: [&str; 3] = ["x", "y", "z"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarKind {
    Continuous { lower: f64, upper: f64 },
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Linear { coef: f64, var: String },
    Quadratic { coef: f64, a: String, b: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn as_str(self) -> &'static str {
        match self {
            Sense::Le => "le",
            Sense::Ge => "ge",
            Sense::Eq => "eq",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConstraint {
    pub name: String,
    pub sense: Sense,
    pub rhs: f64,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UdgpModel {
    pub dims: usize,
    pub variables: Vec<Variable>,
    pub objective: Vec<Term>,
    pub constraints: Vec<ModelConstraint>,
}

pub fn position_var(i: usize, axis: usize) -> String {
    format!("p_{i}_{}", AXES[axis])
}

pub fn gamma_var(i: usize, j: usize) -> String {
    format!("gamma_{i}_{j}")
}

pub fn dist_var(i: usize, j: usize) -> String {
    format!("d2_{i}_{j}")
}

fn lin(coef: f64, var: String) -> Term {
    Term::Linear { coef, var }
}

/// Builds the model for `g` under `limits` in `dims` dimensions.
pub fn build_udgp_model(g: &Graph, limits: &RegisterLimits, dims: usize) -> Result<UdgpModel> {
    check_dims(dims)?;
    let n = g.n();
    let mut variables = Vec::new();
    for i in 1..=n {
        for axis in 0..dims {
            variables.push(Variable {
                name: position_var(i, axis),
                kind: VarKind::Continuous {
                    lower: -REGISTER_RADIUS,
                    upper: REGISTER_RADIUS,
                },
            });
        }
    }
    let rb2 = limits.r_blockade * limits.r_blockade;
    let dmax2 = limits.d_max * limits.d_max;
    // squared diagonal of the square domain, (d_max·√2)²
    let diag2 = 2.0 * dmax2;
    let dmin2 = limits.d_min * limits.d_min;
    let far2 = (limits.r_blockade + limits.epsilon).powi(2);
    let mut objective = Vec::new();
    let mut constraints = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            variables.push(Variable {
                name: dist_var(i, j),
                kind: VarKind::Continuous {
                    lower: 0.0,
                    upper: f64::INFINITY,
                },
            });
            variables.push(Variable {
                name: gamma_var(i, j),
                kind: VarKind::Binary,
            });
            objective.push(lin(1.0, gamma_var(i, j)));
            if g.is_adjacent(i, j) {
                // d² ≤ r_b² + ((100√2)² − r_b²)γ
                constraints.push(ModelConstraint {
                    name: format!("edge_far_{i}_{j}"),
                    sense: Sense::Le,
                    rhs: rb2,
                    terms: vec![lin(1.0, dist_var(i, j)), lin(-(diag2 - rb2), gamma_var(i, j))],
                });
                // d² ≥ (1 − γ)·d_min²
                constraints.push(ModelConstraint {
                    name: format!("edge_near_{i}_{j}"),
                    sense: Sense::Ge,
                    rhs: dmin2,
                    terms: vec![lin(1.0, dist_var(i, j)), lin(dmin2, gamma_var(i, j))],
                });
            } else {
                // d² ≤ 100² + 100²γ
                constraints.push(ModelConstraint {
                    name: format!("nonedge_far_{i}_{j}"),
                    sense: Sense::Le,
                    rhs: dmax2,
                    terms: vec![lin(1.0, dist_var(i, j)), lin(-dmax2, gamma_var(i, j))],
                });
                // d² ≥ (1 − γ)(r_b + ε)²
                constraints.push(ModelConstraint {
                    name: format!("nonedge_near_{i}_{j}"),
                    sense: Sense::Ge,
                    rhs: far2,
                    terms: vec![lin(1.0, dist_var(i, j)), lin(far2, gamma_var(i, j))],
                });
            }
            let mut terms = vec![lin(1.0, dist_var(i, j))];
            for axis in 0..dims {
                let (a, b) = (position_var(i, axis), position_var(j, axis));
                terms.push(Term::Quadratic {
                    coef: -1.0,
                    a: a.clone(),
                    b: a.clone(),
                });
                terms.push(Term::Quadratic {
                    coef: 2.0,
                    a: a.clone(),
                    b: b.clone(),
                });
                terms.push(Term::Quadratic {
                    coef: -1.0,
                    a: b.clone(),
                    b,
                });
            }
            constraints.push(ModelConstraint {
                name: format!("dist_{i}_{j}"),
                sense: Sense::Eq,
                rhs: 0.0,
                terms,
            });
        }
    }
    Ok(UdgpModel {
        dims,
        variables,
        objective,
        constraints,
    })
}

/// Model text for `g`; see the module docs for the grammar.
pub fn export_udgp_model(g: &Graph, limits: &RegisterLimits, dims: usize) -> Result<String> {
    Ok(build_udgp_model(g, limits, dims)?.to_text())
}

fn write_term(out: &mut String, term: &Term) {
    match term {
        Term::Linear { coef, var } => writeln!(out, "  lin {coef} {var}"),
        Term::Quadratic { coef, a, b } => writeln!(out, "  quad {coef} {a} {b}"),
    }
    .expect("writing to a String cannot fail");
}

fn parse_num(token: Option<&str>, line: usize) -> Result<f64> {
    let token = token.ok_or_else(|| Error::Parse(format!("line {line}: missing number")))?;
    token
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("line {line}: bad number {token:?}: {e}")))
}

fn parse_name(token: Option<&str>, line: usize) -> Result<String> {
    token
        .map(str::to_owned)
        .ok_or_else(|| Error::Parse(format!("line {line}: missing name")))
}

impl UdgpModel {
    pub fn binary_count(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn continuous_count(&self) -> usize {
        self.variables.len() - self.binary_count()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# constrained unit disk embedding model\n");
        out.push_str("udgp 1\n");
        writeln!(out, "dims {}", self.dims).unwrap();
        for v in &self.variables {
            match v.kind {
                VarKind::Continuous { lower, upper } => {
                    writeln!(out, "var {} continuous {lower} {upper}", v.name).unwrap()
                }
                VarKind::Binary => writeln!(out, "var {} binary", v.name).unwrap(),
            }
        }
        out.push_str("minimize\n");
        for t in &self.objective {
            write_term(&mut out, t);
        }
        out.push_str("end\n");
        for c in &self.constraints {
            writeln!(out, "constraint {} {} {}", c.name, c.sense.as_str(), c.rhs).unwrap();
            for t in &c.terms {
                write_term(&mut out, t);
            }
            out.push_str("end\n");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        enum Block {
            None,
            Objective,
            Constraint(ModelConstraint),
        }
        let mut dims = None;
        let mut header = false;
        let mut variables = Vec::new();
        let mut objective = Vec::new();
        let mut constraints = Vec::new();
        let mut block = Block::None;

        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let mut tok = content.split_whitespace();
            let keyword = tok.next().expect("non-empty line");
            match (keyword, &mut block) {
                ("lin", Block::Objective)
                | ("quad", Block::Objective)
                | ("lin", Block::Constraint(_))
                | ("quad", Block::Constraint(_)) => {
                    let coef = parse_num(tok.next(), line)?;
                    let term = if keyword == "lin" {
                        Term::Linear {
                            coef,
                            var: parse_name(tok.next(), line)?,
                        }
                    } else {
                        Term::Quadratic {
                            coef,
                            a: parse_name(tok.next(), line)?,
                            b: parse_name(tok.next(), line)?,
                        }
                    };
                    match &mut block {
                        Block::Objective => objective.push(term),
                        Block::Constraint(c) => c.terms.push(term),
                        Block::None => unreachable!(),
                    }
                }
                ("end", Block::Objective) => block = Block::None,
                ("end", Block::Constraint(_)) => {
                    if let Block::Constraint(c) = std::mem::replace(&mut block, Block::None) {
                        constraints.push(c);
                    }
                }
                ("udgp", Block::None) => {
                    if tok.next() != Some("1") {
                        return Err(Error::Parse(format!("line {line}: unsupported version")));
                    }
                    header = true;
                }
                ("dims", Block::None) => {
                    let d = parse_num(tok.next(), line)? as usize;
                    check_dims(d)?;
                    dims = Some(d);
                }
                ("var", Block::None) => {
                    let name = parse_name(tok.next(), line)?;
                    let kind = match tok.next() {
                        Some("binary") => VarKind::Binary,
                        Some("continuous") => VarKind::Continuous {
                            lower: parse_num(tok.next(), line)?,
                            upper: parse_num(tok.next(), line)?,
                        },
                        other => return Err(Error::Parse(format!("line {line}: bad variable kind {other:?}"))),
                    };
                    variables.push(Variable { name, kind });
                }
                ("minimize", Block::None) => block = Block::Objective,
                ("constraint", Block::None) => {
                    let name = parse_name(tok.next(), line)?;
                    let sense = match tok.next() {
                        Some("le") => Sense::Le,
                        Some("ge") => Sense::Ge,
                        Some("eq") => Sense::Eq,
                        other => return Err(Error::Parse(format!("line {line}: bad sense {other:?}"))),
                    };
                    let rhs = parse_num(tok.next(), line)?;
                    block = Block::Constraint(ModelConstraint {
                        name,
                        sense,
                        rhs,
                        terms: Vec::new(),
                    });
                }
                _ => return Err(Error::Parse(format!("line {line}: unexpected {keyword:?}"))),
            }
        }
        if !matches!(block, Block::None) {
            return Err(Error::Parse("unterminated block".into()));
        }
        if !header {
            return Err(Error::Parse("missing `udgp 1` header".into()));
        }
        Ok(UdgpModel {
            dims: dims.ok_or_else(|| Error::Parse("missing dims".into()))?,
            variables,
            objective,
            constraints,
        })
    }

    /// Names of constraints (and variable bounds) violated by `values`,
    /// with a relative tolerance on each comparison.
    pub fn violations(&self, values: &HashMap<String, f64>, tolerance: f64) -> Result<Vec<String>> {
        let get = |name: &str| {
            values
                .get(name)
                .copied()
                .ok_or_else(|| Error::InvalidParameter(format!("no value for variable {name}")))
        };
        let mut out = Vec::new();
        for v in &self.variables {
            let x = get(&v.name)?;
            let ok = match v.kind {
                VarKind::Binary => x == 0.0 || x == 1.0,
                VarKind::Continuous { lower, upper } => x >= lower && x <= upper,
            };
            if !ok {
                out.push(v.name.clone());
            }
        }
        for c in &self.constraints {
            let mut lhs = 0.0;
            let mut scale = c.rhs.abs();
            for t in &c.terms {
                let contribution = match t {
                    Term::Linear { coef, var } => coef * get(var)?,
                    Term::Quadratic { coef, a, b } => coef * get(a)? * get(b)?,
                };
                scale = scale.max(contribution.abs());
                lhs += contribution;
            }
            let slack = tolerance * scale.max(1.0);
            let ok = match c.sense {
                Sense::Le => lhs <= c.rhs + slack,
                Sense::Ge => lhs >= c.rhs - slack,
                Sense::Eq => (lhs - c.rhs).abs() <= slack,
            };
            if !ok {
                out.push(c.name.clone());
            }
        }
        Ok(out)
    }

    pub fn objective_value(&self, values: &HashMap<String, f64>) -> f64 {
        self.objective
            .iter()
            .map(|t| match t {
                Term::Linear { coef, var } => coef * values.get(var).copied().unwrap_or(0.0),
                Term::Quadratic { coef, a, b } => {
                    coef * values.get(a).copied().unwrap_or(0.0) * values.get(b).copied().unwrap_or(0.0)
                }
            })
            .sum()
    }
}

/// Variable assignment for an embedding: positions, their squared pair
/// distances and `γ ≡ gamma`.
pub fn assignment_from_embedding(e: &Embedding, gamma: f64) -> HashMap<String, f64> {
    let mut values = HashMap::new();
    let n = e.n();
    for (i, p) in e.points().enumerate() {
        for (axis, &c) in p.iter().enumerate() {
            values.insert(position_var(i + 1, axis), c);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let d2 = e
                .point(i)
                .iter()
                .zip(e.point(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
            values.insert(dist_var(i + 1, j + 1), d2);
            values.insert(gamma_var(i + 1, j + 1), gamma);
        }
    }
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::check_feasibility;

    fn limits() -> RegisterLimits {
        RegisterLimits::new(4.0, 100.0, 10.26, 0.1, 2).unwrap()
    }

    #[test]
    fn k2_counts() {
        let m = build_udgp_model(&Graph::complete(2), &limits(), 2).unwrap();
        let positions = m.variables.iter().filter(|v| v.name.starts_with("p_")).count();
        assert_eq!(positions, 4);
        assert_eq!(m.binary_count(), 1);
        let pair = m.constraints.iter().filter(|c| !c.name.starts_with("dist_")).count();
        assert_eq!((pair, m.constraints.len() - pair), (2, 1));
        assert_eq!(
            m.constraints[0].terms[1],
            lin(-(20000.0 - 10.26 * 10.26), gamma_var(1, 2))
        );
    }

    #[test]
    fn binaries_per_pair() {
        let m = build_udgp_model(&Graph::path(3), &limits(), 3).unwrap();
        assert_eq!(m.binary_count(), 3);
        assert_eq!(m.continuous_count(), 9 + 3);
        assert_eq!(m.objective.len(), 3);
        assert!(matches!(
            build_udgp_model(&Graph::path(3), &limits(), 1),
            Err(Error::BadDims(1))
        ));
    }

    #[test]
    fn text_round_trip() {
        let g = Graph::from_edges(4, [(1, 2), (2, 3), (1, 4)]).unwrap();
        for dims in [2, 3] {
            let m = build_udgp_model(&g, &limits(), dims).unwrap();
            let text = m.to_text();
            let back = UdgpModel::parse(&text).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.to_text(), text);
        }
        assert!(UdgpModel::parse("dims 2\n").is_err());
        assert!(UdgpModel::parse("udgp 1\ndims 2\nminimize\n lin 1 a\n").is_err());
    }

    #[test]
    fn feasible_line_satisfies_model() {
        let e = Embedding::from_points(&[[0.0, 0.0], [9.0, 0.0], [18.0, 0.0]]).unwrap();
        let g = Graph::path(3);
        assert!(check_feasibility(&e, &g, &limits()).unwrap().feasible);
        let m = build_udgp_model(&g, &limits(), 2).unwrap();
        let values = assignment_from_embedding(&e, 0.0);
        assert!(m.violations(&values, 1e-9).unwrap().is_empty());
        assert_eq!(m.objective_value(&values), 0.0);

        let squeezed = Embedding::from_points(&[[0.0, 0.0], [3.0, 0.0], [18.0, 0.0]]).unwrap();
        let bad = m.violations(&assignment_from_embedding(&squeezed, 0.0), 1e-9).unwrap();
        assert_eq!(bad, vec!["edge_near_1_2".to_string(), "edge_far_2_3".to_string()]);
        // γ = 1 relaxes every pair constraint
        let relaxed = m.violations(&assignment_from_embedding(&squeezed, 1.0), 1e-9).unwrap();
        assert!(relaxed.is_empty());
    }
}
