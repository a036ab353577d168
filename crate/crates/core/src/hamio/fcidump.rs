use super::{HamError, MolecularHamiltonian};
use std::fmt::Write as _;
use std::path::Path;

fn perr(line: usize, msg: impl Into<String>) -> HamError {
    HamError::Parse { line, msg: msg.into() }
}

pub fn read_fcidump(path: impl AsRef<Path>) -> Result<MolecularHamiltonian, HamError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| HamError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_fcidump(&text)
}

struct Namelist {
    entries: Vec<(String, Vec<String>, usize)>,
}

impl Namelist {
    fn get(&self, key: &str) -> Option<(&[String], usize)> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, l)| (v.as_slice(), *l))
    }

    fn integer(&self, key: &str, header_line: usize) -> Result<Option<i64>, HamError> {
        match self.get(key) {
            None => Ok(None),
            Some((vals, line)) => {
                let v = vals.first().ok_or_else(|| perr(line, format!("{key} has no value")))?;
                v.parse::<i64>()
                    .map(Some)
                    .map_err(|_| perr(line.max(header_line), format!("{key}: expected an integer, got `{v}`")))
            }
        }
    }
}

/// Split a namelist body into `KEY=value,value,…` groups, keeping the line
/// each key appeared on.
fn parse_namelist(tokens: &[(String, usize)]) -> Result<Namelist, HamError> {
    let mut entries: Vec<(String, Vec<String>, usize)> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let (tok, line) = &tokens[i];
        if i + 1 < tokens.len() && tokens[i + 1].0 == "=" {
            if tok == "=" {
                return Err(perr(*line, "malformed namelist: `=` without a key"));
            }
            entries.push((tok.to_ascii_uppercase(), Vec::new(), *line));
            i += 2;
            continue;
        }
        if tok == "=" {
            return Err(perr(*line, "malformed namelist: `=` without a key"));
        }
        match entries.last_mut() {
            Some((_, vals, _)) => vals.push(tok.clone()),
            None => return Err(perr(*line, format!("malformed namelist: value `{tok}` before any key"))),
        }
        i += 1;
    }
    Ok(Namelist { entries })
}

fn parse_value(s: &str) -> Option<f64> {
    s.parse::<f64>()
        .ok()
        .or_else(|| s.replace(['D', 'd'], "E").parse::<f64>().ok())
}

/// Parse FCIDUMP text into a fully symmetrized Hamiltonian.
///
/// Symmetry-equivalent integrals missing from the file are filled from the
/// listed ones; a later line overwrites every slot equivalent to it.
pub fn parse_fcidump(text: &str) -> Result<MolecularHamiltonian, HamError> {
    let lines: Vec<&str> = text.lines().collect();
    let start = lines
        .iter()
        .position(|l| !l.trim().is_empty())
        .ok_or_else(|| perr(1, "empty input"))?;
    let first = lines[start].trim_start();
    if !first.to_ascii_uppercase().starts_with("&FCI") {
        return Err(perr(start + 1, "expected `&FCI` namelist header"));
    }

    // Collect header tokens until `&END` or a lone `/`.
    let mut tokens: Vec<(String, usize)> = Vec::new();
    let mut body_start = None;
    for (idx, raw) in lines.iter().enumerate().skip(start) {
        let lineno = idx + 1;
        let mut s = raw.to_string();
        if idx == start {
            s = s.trim_start()[4..].to_string();
        }
        let upper = s.to_ascii_uppercase();
        let (content, ends) = if let Some(pos) = upper.find("&END") {
            (s[..pos].to_string(), true)
        } else if let Some(pos) = s.find('/') {
            (s[..pos].to_string(), true)
        } else {
            (s, false)
        };
        let spaced = content.replace('=', " = ");
        for t in spaced.split(|c: char| c == ',' || c.is_whitespace()) {
            if !t.is_empty() {
                tokens.push((t.to_string(), lineno));
            }
        }
        if ends {
            body_start = Some(idx + 1);
            break;
        }
    }
    let body_start = body_start.ok_or_else(|| perr(start + 1, "malformed namelist: missing `&END`"))?;
    let header_line = start + 1;
    let nl = parse_namelist(&tokens)?;
    let norb = nl
        .integer("NORB", header_line)?
        .ok_or_else(|| perr(header_line, "missing NORB"))?;
    let nelec = nl
        .integer("NELEC", header_line)?
        .ok_or_else(|| perr(header_line, "missing NELEC"))?;
    let ms2 = nl.integer("MS2", header_line)?.unwrap_or(0);
    if norb < 1 {
        return Err(perr(header_line, format!("NORB must be positive, got {norb}")));
    }
    if nelec < 0 || nelec > 2 * norb {
        return Err(perr(
            header_line,
            format!("NELEC={nelec} incompatible with NORB={norb}"),
        ));
    }
    // ORBSYM / ISYM are accepted and ignored.
    let norb = norb as usize;
    let mut h = MolecularHamiltonian::zeros(norb, nelec as usize);
    h.ms2 = ms2;

    for (idx, raw) in lines.iter().enumerate().skip(body_start) {
        let lineno = idx + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 5 {
            return Err(perr(
                lineno,
                format!("expected `value i j k l`, found {} fields", fields.len()),
            ));
        }
        let v = parse_value(fields[0]).ok_or_else(|| perr(lineno, format!("bad value `{}`", fields[0])))?;
        let mut idx4 = [0usize; 4];
        for (slot, f) in idx4.iter_mut().zip(&fields[1..]) {
            let x: i64 = f.parse().map_err(|_| perr(lineno, format!("bad index `{f}`")))?;
            if x < 0 || x as usize > norb {
                return Err(perr(lineno, format!("index {x} out of range 0..={norb}")));
            }
            *slot = x as usize;
        }
        match idx4 {
            [0, 0, 0, 0] => h.e_core = v,
            [i, j, 0, 0] if i > 0 && j > 0 => h.set_h1(i - 1, j - 1, v),
            // orbital energies; not used
            [i, 0, 0, 0] if i > 0 => {}
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => h.set_eri(i - 1, j - 1, k - 1, l - 1, v),
            _ => return Err(perr(lineno, format!("unrecognised index pattern {idx4:?}"))),
        }
    }
    Ok(h)
}

/// Serialize to FCIDUMP. Values use the shortest representation that parses
/// back to the same bits, so `parse_fcidump(write_fcidump(h)) == h`.
pub fn write_fcidump(h: &MolecularHamiltonian) -> String {
    let n = h.norb;
    let mut out = String::new();
    let _ = writeln!(out, " &FCI NORB={},NELEC={},MS2={},", n, h.nelec, h.ms2);
    let _ = writeln!(out, "  ORBSYM={}", "1,".repeat(n));
    let _ = writeln!(out, "  ISYM=1,");
    let _ = writeln!(out, " &END");
    for i in 0..n {
        for j in 0..=i {
            let ij = i * (i + 1) / 2 + j;
            for k in 0..n {
                for l in 0..=k {
                    let kl = k * (k + 1) / 2 + l;
                    if kl > ij {
                        continue;
                    }
                    let v = h.eri[[i, j, k, l]];
                    if v.to_bits() != 0 {
                        let _ = writeln!(out, "{:e} {} {} {} {}", v, i + 1, j + 1, k + 1, l + 1);
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let v = h.h1[[i, j]];
            if v.to_bits() != 0 {
                let _ = writeln!(out, "{:e} {} {} 0 0", v, i + 1, j + 1);
            }
        }
    }
    let _ = writeln!(out, "{:e} 0 0 0 0", h.e_core);
    out
}
