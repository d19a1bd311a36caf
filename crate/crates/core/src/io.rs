//! Versioned plain-text formats for loop configurations and triples.
//!
//! An edge set is stored as a hex string of bytes, edge `i` at bit `i % 8`
//! of byte `i / 8`. Every document embeds the region description.

use fixedbitset::FixedBitSet;

use crate::coupling::CoherentTriple;
use crate::error::{Error, Result};
use crate::hexlattice::Region;
use crate::loopcore::LoopConfig;

pub fn bitmap_to_hex(set: &FixedBitSet, len: usize) -> String {
    let mut bytes = vec![0u8; len.div_ceil(8)];
    for i in set.ones().filter(|&i| i < len) {
        bytes[i / 8] |= 1 << (i % 8);
    }
    hex::encode(bytes)
}

pub fn bitmap_from_hex(text: &str, len: usize) -> Result<FixedBitSet> {
    let bytes = hex::decode(text.trim()).map_err(|e| Error::Parse(format!("bad hex bitmap: {e}")))?;
    if bytes.len() != len.div_ceil(8) {
        return Err(Error::Parse(format!("bitmap has {} bytes, expected {}", bytes.len(), len.div_ceil(8))));
    }
    let mut s = FixedBitSet::with_capacity(len);
    for i in 0..bytes.len() * 8 {
        if bytes[i / 8] >> (i % 8) & 1 == 1 {
            if i >= len {
                return Err(Error::Parse("bitmap sets bits past the last edge".into()));
            }
            s.insert(i);
        }
    }
    Ok(s)
}

fn split_region<'t>(text: &'t str, header: &str) -> Result<(Region, std::vec::IntoIter<&'t str>)> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.first().map(|l| l.trim()) != Some(header) {
        return Err(Error::Parse(format!("missing '{header}' header")));
    }
    // the region block ends at the first bitmap line
    let cut = lines.iter().position(|l| l.trim_start().starts_with("bits")).unwrap_or(lines.len());
    let region = Region::parse(&lines[1..cut].join("\n"))?;
    Ok((region, lines[cut..].to_vec().into_iter()))
}

fn bits_line<'t>(lines: &mut impl Iterator<Item = &'t str>, name: &str, len: usize) -> Result<FixedBitSet> {
    let line = lines.next().ok_or_else(|| Error::Parse(format!("missing bits {name}")))?;
    let rest = line
        .trim()
        .strip_prefix("bits ")
        .and_then(|r| r.strip_prefix(name))
        .ok_or_else(|| Error::Parse(format!("expected 'bits {name}'")))?;
    bitmap_from_hex(rest.trim(), len)
}

pub fn loop_config_to_text(region: &Region, omega: &LoopConfig) -> String {
    format!("loopconfig v1\n{}bits omega {}\n", region.describe(), bitmap_to_hex(omega.edges(), region.edge_count()))
}

pub fn loop_config_from_text(text: &str) -> Result<(Region, LoopConfig)> {
    let (region, mut lines) = split_region(text, "loopconfig v1")?;
    let set = bits_line(&mut lines, "omega", region.edge_count())?;
    let omega = LoopConfig::from_edges(&region, set)?;
    Ok((region, omega))
}

pub fn triple_to_text(region: &Region, t: &CoherentTriple) -> String {
    let ne = region.edge_count();
    format!(
        "triple v1\n{}bits red {}\nbits blue {}\nbits eta {}\n",
        region.describe(),
        bitmap_to_hex(t.red.edges(), ne),
        bitmap_to_hex(t.blue.edges(), ne),
        bitmap_to_hex(&t.eta, ne)
    )
}

pub fn triple_from_text(text: &str) -> Result<(Region, CoherentTriple)> {
    let (region, mut lines) = split_region(text, "triple v1")?;
    let ne = region.edge_count();
    let red = LoopConfig::from_edges(&region, bits_line(&mut lines, "red", ne)?)?;
    let blue = LoopConfig::from_edges(&region, bits_line(&mut lines, "blue", ne)?)?;
    let eta = bits_line(&mut lines, "eta", ne)?;
    let t = CoherentTriple::new(red, blue, eta)?;
    Ok((region, t))
}
