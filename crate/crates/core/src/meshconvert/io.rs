//! Neutral hex-mesh text format and a reader for the node/element card
//! subset of FEM input decks.
//!
//! Neutral format:
//!
//! ```text
//! # source: external-fem
//! nodes
//! 1 0.0 0.0 0.0
//! ...
//! hexes
//! 1 1 2 3 4 5 6 7 8
//! displacements
//! 1 0.0 0.0 -0.1
//! sensing
//! 5 6 7 8
//! ```
//!
//! `displacements` and `sensing` are optional. Node references use labels.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::hex::HexMesh;
use super::MeshError;
use crate::math::Vec3;

/// Neutral file contents plus the `# source:` provenance tag, if any.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NeutralMesh {
    pub mesh: HexMesh,
    pub source: Option<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Nodes,
    Hexes,
    Displacements,
    Sensing,
}

fn parse_err(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_f(tok: &str, line: usize) -> Result<f64, MeshError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("bad number `{tok}`")))?;
    if !v.is_finite() {
        return Err(parse_err(line, "non-finite coordinate"));
    }
    Ok(v)
}

fn parse_id(tok: &str, line: usize) -> Result<u64, MeshError> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad id `{tok}`")))
}

fn lookup(map: &HashMap<u64, usize>, id: u64, line: usize) -> Result<usize, MeshError> {
    map.get(&id)
        .copied()
        .ok_or_else(|| parse_err(line, format!("unknown node {id}")))
}

pub fn read_neutral<R: BufRead>(reader: R) -> Result<NeutralMesh, MeshError> {
    let mut section = Section::None;
    let mut source = None;
    let mut nodes = Vec::new();
    let mut node_ids = Vec::new();
    let mut index_of: HashMap<u64, usize> = HashMap::new();
    let mut raw_hexes: Vec<(usize, u64, [u64; 8])> = Vec::new();
    let mut raw_disp: Vec<(usize, u64, Vec3)> = Vec::new();
    let mut raw_sensing: Vec<(usize, u64)> = Vec::new();
    let mut saw_sensing = false;

    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let ln = k + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(c) = t.strip_prefix('#') {
            if let Some(v) = c.trim().strip_prefix("source:") {
                source = Some(v.trim().to_string());
            }
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        if toks.len() == 1 && toks[0].parse::<u64>().is_err() {
            section = match toks[0].to_ascii_lowercase().as_str() {
                "nodes" => Section::Nodes,
                "hexes" => Section::Hexes,
                "displacements" => Section::Displacements,
                "sensing" => {
                    saw_sensing = true;
                    Section::Sensing
                }
                other => return Err(parse_err(ln, format!("unknown section `{other}`"))),
            };
            continue;
        }
        match section {
            Section::None => return Err(parse_err(ln, "data before the first section header")),
            Section::Nodes => {
                if toks.len() != 4 {
                    return Err(parse_err(ln, "node lines need `id x y z`"));
                }
                let id = parse_id(toks[0], ln)?;
                let p = Vec3::new(
                    parse_f(toks[1], ln)?,
                    parse_f(toks[2], ln)?,
                    parse_f(toks[3], ln)?,
                );
                if index_of.insert(id, nodes.len()).is_some() {
                    return Err(parse_err(ln, format!("duplicate node {id}")));
                }
                nodes.push(p);
                node_ids.push(id);
            }
            Section::Hexes => {
                if toks.len() != 9 {
                    return Err(parse_err(ln, "hex lines need `id n1 .. n8`"));
                }
                let id = parse_id(toks[0], ln)?;
                let mut conn = [0u64; 8];
                for (c, tok) in conn.iter_mut().zip(&toks[1..]) {
                    *c = parse_id(tok, ln)?;
                }
                raw_hexes.push((ln, id, conn));
            }
            Section::Displacements => {
                if toks.len() != 4 {
                    return Err(parse_err(ln, "displacement lines need `id dx dy dz`"));
                }
                let id = parse_id(toks[0], ln)?;
                let d = Vec3::new(
                    parse_f(toks[1], ln)?,
                    parse_f(toks[2], ln)?,
                    parse_f(toks[3], ln)?,
                );
                raw_disp.push((ln, id, d));
            }
            Section::Sensing => {
                for tok in toks {
                    raw_sensing.push((ln, parse_id(tok, ln)?));
                }
            }
        }
    }

    let mut elements = Vec::with_capacity(raw_hexes.len());
    let mut element_ids = Vec::with_capacity(raw_hexes.len());
    for (ln, id, conn) in raw_hexes {
        let mut e = [0usize; 8];
        for (slot, nid) in e.iter_mut().zip(conn) {
            *slot = lookup(&index_of, nid, ln)?;
        }
        elements.push(e);
        element_ids.push(id);
    }
    let displacements = if raw_disp.is_empty() {
        None
    } else {
        let mut d = vec![Vec3::zeros(); nodes.len()];
        let mut seen = vec![false; nodes.len()];
        for (ln, id, v) in raw_disp {
            let i = lookup(&index_of, id, ln)?;
            d[i] = v;
            seen[i] = true;
        }
        let found = seen.iter().filter(|&&s| s).count();
        if found != nodes.len() {
            return Err(MeshError::CardinalityMismatch {
                expected: nodes.len(),
                found,
            });
        }
        Some(d)
    };
    let sensing_nodes = if saw_sensing {
        let mut s = raw_sensing
            .into_iter()
            .map(|(ln, id)| lookup(&index_of, id, ln))
            .collect::<Result<Vec<_>, _>>()?;
        s.sort_unstable();
        s.dedup();
        Some(s)
    } else {
        None
    };
    let mesh = HexMesh {
        nodes,
        elements,
        displacements,
        node_ids,
        element_ids,
        sensing_nodes,
    };
    mesh.validate()?;
    Ok(NeutralMesh { mesh, source })
}

pub fn write_neutral<W: Write>(
    mesh: &HexMesh,
    source: Option<&str>,
    mut out: W,
) -> Result<(), MeshError> {
    writeln!(out, "# finray neutral hex mesh")?;
    if let Some(s) = source {
        writeln!(out, "# source: {s}")?;
    }
    writeln!(out, "nodes")?;
    for (i, p) in mesh.nodes.iter().enumerate() {
        writeln!(out, "{} {:?} {:?} {:?}", mesh.node_label(i), p.x, p.y, p.z)?;
    }
    writeln!(out, "hexes")?;
    for (e, conn) in mesh.elements.iter().enumerate() {
        write!(out, "{}", mesh.element_label(e))?;
        for &n in conn {
            write!(out, " {}", mesh.node_label(n))?;
        }
        writeln!(out)?;
    }
    if let Some(d) = &mesh.displacements {
        writeln!(out, "displacements")?;
        for (i, u) in d.iter().enumerate() {
            writeln!(out, "{} {:?} {:?} {:?}", mesh.node_label(i), u.x, u.y, u.z)?;
        }
    }
    if let Some(s) = &mesh.sensing_nodes {
        writeln!(out, "sensing")?;
        for chunk in s.chunks(16) {
            let labels: Vec<String> = chunk
                .iter()
                .map(|&i| mesh.node_label(i).to_string())
                .collect();
            writeln!(out, "{}", labels.join(" "))?;
        }
    }
    Ok(())
}

const HEX_TYPES: [&str; 4] = ["C3D8R", "C3D8", "C3D8H", "C3D8I"];

/// Reads `*NODE` and `*ELEMENT, TYPE=C3D8R` cards. Other cards, and elements
/// of other types, are skipped with a warning.
pub fn read_fem_deck<R: BufRead>(reader: R) -> Result<HexMesh, MeshError> {
    #[derive(PartialEq)]
    enum Card {
        Skip,
        Node,
        Hex,
    }
    let mut card = Card::Skip;
    let mut nodes = Vec::new();
    let mut node_ids = Vec::new();
    let mut index_of: HashMap<u64, usize> = HashMap::new();
    let mut raw: Vec<(usize, u64, Vec<u64>)> = Vec::new();
    let mut pending: Option<(usize, Vec<u64>)> = None;

    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let ln = k + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with("**") {
            continue;
        }
        if let Some(kw) = t.strip_prefix('*') {
            if let Some((pl, _)) = pending.take() {
                return Err(parse_err(pl, "element record ends before 9 fields"));
            }
            let parts: Vec<String> = kw
                .split(',')
                .map(|s| s.trim().to_ascii_uppercase())
                .collect();
            card = match parts[0].as_str() {
                "NODE" => Card::Node,
                "ELEMENT" => {
                    let ty = parts.iter().find_map(|p| {
                        p.strip_prefix("TYPE")
                            .map(|r| r.trim_start_matches([' ', '=']).to_string())
                    });
                    match ty {
                        Some(ty) if HEX_TYPES.contains(&ty.as_str()) => Card::Hex,
                        Some(ty) => {
                            log::warn!("line {ln}: skipping *ELEMENT block of type {ty}");
                            Card::Skip
                        }
                        None => return Err(parse_err(ln, "*ELEMENT card without TYPE")),
                    }
                }
                other => {
                    log::warn!("line {ln}: ignoring *{other} card");
                    Card::Skip
                }
            };
            continue;
        }
        match card {
            Card::Skip => {}
            Card::Node => {
                let f: Vec<&str> = t
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .collect();
                if f.len() < 4 {
                    return Err(parse_err(ln, "node record needs `id, x, y, z`"));
                }
                let id = parse_id(f[0], ln)?;
                let p = Vec3::new(parse_f(f[1], ln)?, parse_f(f[2], ln)?, parse_f(f[3], ln)?);
                if index_of.insert(id, nodes.len()).is_some() {
                    return Err(parse_err(ln, format!("duplicate node {id}")));
                }
                nodes.push(p);
                node_ids.push(id);
            }
            Card::Hex => {
                let (start, mut fields) = pending.take().unwrap_or((ln, Vec::new()));
                for tok in t.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    fields.push(parse_id(tok, ln)?);
                }
                match fields.len() {
                    n if n < 9 => pending = Some((start, fields)),
                    9 => raw.push((start, fields[0], fields[1..].to_vec())),
                    _ => return Err(parse_err(start, "element record has more than 9 fields")),
                }
            }
        }
    }
    if let Some((pl, _)) = pending {
        return Err(parse_err(pl, "element record ends before 9 fields"));
    }
    let mut elements = Vec::with_capacity(raw.len());
    let mut element_ids = Vec::with_capacity(raw.len());
    for (ln, id, conn) in raw {
        let mut e = [0usize; 8];
        for (slot, &nid) in e.iter_mut().zip(&conn) {
            *slot = lookup(&index_of, nid, ln)?;
        }
        elements.push(e);
        element_ids.push(id);
    }
    let mesh = HexMesh {
        nodes,
        elements,
        node_ids,
        element_ids,
        ..Default::default()
    };
    mesh.validate()?;
    Ok(mesh)
}
