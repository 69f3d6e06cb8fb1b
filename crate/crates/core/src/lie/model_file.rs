//! Plain-text model files.
//!
//! ```text
//! # comment
//! name so3
//! dim 3
//! rep_dim 3
//! structure 1 2 3 1.0      # c[1][2][3]; the (2,1,3) entry is filled with -1.0
//! torus 3                  # 1-based basis indices spanning t
//! root 1.0                 # covector on t; list both signs
//! generator 1 re im re im ... (rep_dim² pairs, row-major)
//! ```

use crate::lie::{LieModel, ModelKind, RealRoot};
use crate::{CMat, Error, Result, C64};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse '{tok}'")))
}

fn index(tok: &str, line: usize, dim: usize) -> Result<usize> {
    let k: usize = num(tok, line)?;
    if k == 0 || k > dim {
        return Err(parse_err(line, format!("index {k} outside 1..={dim}")));
    }
    Ok(k - 1)
}

pub fn parse_model_file(text: &str) -> Result<LieModel> {
    let mut name = String::from("custom");
    let mut dim: Option<usize> = None;
    let mut rep_dim: Option<usize> = None;
    let mut structure: Vec<f64> = Vec::new();
    let mut torus = Vec::new();
    let mut roots = Vec::new();
    let mut generators: Vec<Option<CMat>> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let need_dim = || dim.ok_or_else(|| parse_err(line, "'dim' must come first"));
        match toks[0] {
            "name" => {
                name = toks
                    .get(1)
                    .ok_or_else(|| parse_err(line, "missing name"))?
                    .to_string();
            }
            "dim" => {
                let n: usize = num(
                    toks.get(1).ok_or_else(|| parse_err(line, "missing dim"))?,
                    line,
                )?;
                if n == 0 {
                    return Err(parse_err(line, "dim must be positive"));
                }
                dim = Some(n);
                structure = vec![0.0; n * n * n];
                generators = vec![None; n];
            }
            "rep_dim" => {
                rep_dim = Some(num(
                    toks.get(1)
                        .ok_or_else(|| parse_err(line, "missing rep_dim"))?,
                    line,
                )?);
            }
            "structure" => {
                let n = need_dim()?;
                if toks.len() != 5 {
                    return Err(parse_err(line, "expected 'structure i j k value'"));
                }
                let (a, b, c) = (
                    index(toks[1], line, n)?,
                    index(toks[2], line, n)?,
                    index(toks[3], line, n)?,
                );
                let v: f64 = num(toks[4], line)?;
                structure[a * n * n + b * n + c] = v;
                structure[b * n * n + a * n + c] = -v;
            }
            "torus" => {
                let n = need_dim()?;
                for t in &toks[1..] {
                    torus.push(index(t, line, n)?);
                }
            }
            "root" => {
                let cov: Result<Vec<f64>> = toks[1..].iter().map(|t| num(t, line)).collect();
                roots.push(RealRoot::new(cov?));
            }
            "generator" => {
                let n = need_dim()?;
                let r =
                    rep_dim.ok_or_else(|| parse_err(line, "'rep_dim' must precede generators"))?;
                if toks.len() != 2 + 2 * r * r {
                    return Err(parse_err(
                        line,
                        format!("generator needs {} numbers", 2 * r * r),
                    ));
                }
                let k = index(toks[1], line, n)?;
                let vals: Result<Vec<f64>> = toks[2..].iter().map(|t| num(t, line)).collect();
                let vals = vals?;
                let entries: Vec<C64> = vals.chunks(2).map(|p| C64::new(p[0], p[1])).collect();
                generators[k] = Some(CMat::from_row_slice(r, r, &entries));
            }
            other => return Err(parse_err(line, format!("unknown keyword '{other}'"))),
        }
    }
    dim.ok_or_else(|| parse_err(0, "missing 'dim'"))?;
    let generators: Vec<CMat> = generators
        .into_iter()
        .enumerate()
        .map(|(k, g)| g.ok_or_else(|| parse_err(0, format!("generator {} missing", k + 1))))
        .collect::<Result<_>>()?;
    for root in &roots {
        if !roots.iter().any(|r| r.approx_eq(&root.negated(), 1e-12)) {
            return Err(Error::Model(format!(
                "root {:?} listed without its negative",
                root.covector
            )));
        }
    }
    LieModel::from_parts(
        &name,
        ModelKind::Custom,
        structure,
        torus,
        roots,
        generators,
        Vec::new(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::AlgebraVec;

    const SU2_TEXT: &str = "\
name su2-file
dim 3
rep_dim 2
structure 1 2 3 1
structure 2 3 1 1
structure 3 1 2 1
torus 3
root 1
root -1
generator 1  0 0  0 -0.5  0 -0.5  0 0
generator 2  0 0  -0.5 0  0.5 0  0 0
generator 3  0 -0.5  0 0  0 0  0 0.5
";

    #[test]
    fn file_reproduces_builtin_su2() {
        let m = parse_model_file(SU2_TEXT).unwrap();
        let b = LieModel::su2();
        let x = AlgebraVec::new(vec![0.3, 1.0, -0.2]);
        let y = AlgebraVec::new(vec![-1.1, 0.4, 0.9]);
        assert!((&m.bracket(&x, &y).unwrap() - &b.bracket(&x, &y).unwrap()).norm() < 1e-15);
        assert_eq!(m.weyl_group().unwrap().len(), 2);
        assert_eq!(m.name(), "su2-file");
    }

    #[test]
    fn broken_jacobi_is_rejected() {
        let text = SU2_TEXT.replace("structure 3 1 2 1", "structure 3 1 2 2");
        assert!(matches!(parse_model_file(&text), Err(Error::Model(_))));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let text = "dim 1\nrep_dim 1\nbogus 3\n";
        assert!(matches!(
            parse_model_file(text),
            Err(Error::Parse { line: 3, .. })
        ));
        let text = "rep_dim 1\nstructure 1 1 1 0\n";
        assert!(matches!(
            parse_model_file(text),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
