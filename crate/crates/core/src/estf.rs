//! ESTF-1 field files: one JSON header line, then little-endian `f64`
//! payload ordered field, component, `t, z, y, x` with `x` fastest.
//! Complex values are stored as interleaved `(re, im)` pairs.

use std::io::Write;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{AnalyticEMField, EMFieldSample, ScaleStack, StaticFields};
use crate::grid::SpaceTimeGrid;
use crate::scalar::Real;

pub const FORMAT: &str = "ESTF-1";
pub const UNITS: &str = "HL-natural";

const SUFFIX_STATIC: &str = "_static";
const NAMES: [(&str, usize); 4] = [("E", 3), ("H", 3), ("J", 3), ("rho", 1)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub name: String,
    pub components: usize,
    pub complex: bool,
    /// Scale `s` of an analytic field; `None` for real fields.
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub format: String,
    pub units: String,
    /// `[nx, ny, nz, nt]`
    pub dims: [usize; 4],
    pub spacings: [f64; 4],
    pub origin: [f64; 4],
    pub fields: Vec<FieldHeader>,
    /// Finite scales present in the file.
    pub scales: Vec<f64>,
    /// Whether the `s → ∞` level was part of the stack when written.
    #[serde(default)]
    pub static_limit: bool,
}

impl Header {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::EstfHeader(m));
        if self.format != FORMAT {
            return bad(format!("format tag {:?}, expected {FORMAT:?}", self.format));
        }
        if self.units != UNITS {
            return bad(format!("units tag {:?}, expected {UNITS:?}", self.units));
        }
        if self.dims.contains(&0) {
            return bad(format!("every dimension must be ≥ 1, got {:?}", self.dims));
        }
        if self.fields.is_empty() {
            return bad("no fields listed".into());
        }
        if self.fields.iter().any(|f| f.components == 0) {
            return bad("a field has zero components".into());
        }
        if self.fields.iter().any(|f| f.complex != f.scale.is_some()) {
            return bad("complex fields carry a scale and real fields do not".into());
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.dims.iter().product()
    }

    /// Number of `f64` values in the payload.
    pub fn payload_len(&self) -> usize {
        let n = self.node_count();
        self.fields.iter().map(|f| f.components * n * if f.complex { 2 } else { 1 }).sum()
    }

    pub fn grid(&self) -> Result<SpaceTimeGrid<f64>> {
        SpaceTimeGrid::new(self.dims, self.spacings, self.origin).map_err(|e| Error::EstfHeader(e.to_string()))
    }
}

/// A parsed ESTF-1 file. `payload[k]` holds the values of `header.fields[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstfFile {
    pub header: Header,
    pub payload: Vec<Vec<f64>>,
}

impl EstfFile {
    fn new(grid: &SpaceTimeGrid<f64>, scales: Vec<f64>, static_limit: bool) -> Self {
        EstfFile {
            header: Header {
                format: FORMAT.into(),
                units: UNITS.into(),
                dims: [grid.nx, grid.ny, grid.nz, grid.nt],
                spacings: [grid.dx, grid.dy, grid.dz, grid.dt],
                origin: grid.origin,
                fields: Vec::new(),
                scales,
                static_limit,
            },
            payload: Vec::new(),
        }
    }

    fn push(&mut self, name: &str, components: usize, scale: Option<f64>, data: Vec<f64>) {
        self.header.fields.push(FieldHeader { name: name.into(), components, complex: scale.is_some(), scale });
        self.payload.push(data);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.header.validate()?;
        let mut out = serde_json::to_vec(&self.header).map_err(|e| Error::EstfHeader(e.to_string()))?;
        out.push(b'\n');
        out.reserve(self.header.payload_len() * 8);
        for (f, data) in self.header.fields.iter().zip(&self.payload) {
            let expect = f.components * self.header.node_count() * if f.complex { 2 } else { 1 };
            if data.len() != expect {
                return Err(Error::EstfPayload(format!("field {} holds {} values, expected {expect}", f.name, data.len())));
            }
            for v in data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::EstfHeader("no newline terminating the header".into()))?;
        let text = std::str::from_utf8(&bytes[..nl]).map_err(|e| Error::EstfHeader(e.to_string()))?;
        let header: Header = serde_json::from_str(text).map_err(|e| Error::EstfHeader(e.to_string()))?;
        header.validate()?;
        let body = &bytes[nl + 1..];
        let expect = header.payload_len() * 8;
        if body.len() != expect {
            return Err(Error::EstfPayload(format!("payload is {} bytes, header implies {expect}", body.len())));
        }
        let mut values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
        let n = header.node_count();
        let payload = header
            .fields
            .iter()
            .map(|f| values.by_ref().take(f.components * n * if f.complex { 2 } else { 1 }).collect())
            .collect();
        Ok(EstfFile { header, payload })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(&self.to_bytes()?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    fn field(&self, name: &str, scale: Option<f64>) -> Option<(&FieldHeader, &[f64])> {
        self.header
            .fields
            .iter()
            .zip(&self.payload)
            .find(|(f, _)| f.name == name && f.scale.map(f64::to_bits) == scale.map(f64::to_bits))
            .map(|(f, d)| (f, d.as_slice()))
    }

    /// Encodes a sampled field as real fields `E, H, J, rho`.
    pub fn from_sample<T: Real>(f: &EMFieldSample<T>) -> Result<Self> {
        f.validate()?;
        let mut out = Self::new(&grid_f64(&f.grid), Vec::new(), false);
        let ch = f.channels();
        let mut at = 0;
        for (name, comps) in NAMES {
            out.push(name, comps, None, ch[at..at + comps].iter().flat_map(|c| c.iter().map(|v| v.to_f64_lossy())).collect());
            at += comps;
        }
        Ok(out)
    }

    pub fn to_sample<T: Real>(&self) -> Result<EMFieldSample<T>> {
        let grid = grid_from_f64(&self.header.grid()?)?;
        let mut f = EMFieldSample::zeros(grid);
        let n = grid.len();
        let [e, h, j] = [&mut f.e, &mut f.h, &mut f.j];
        for (name, dst) in [("E", e), ("H", h), ("J", j)] {
            let data = self.real(name)?;
            for (c, d) in dst.iter_mut().enumerate() {
                *d = data[c * n..(c + 1) * n].iter().map(|&v| T::lit(v)).collect();
            }
        }
        f.rho = self.real("rho")?.iter().map(|&v| T::lit(v)).collect();
        Ok(f)
    }

    fn real(&self, name: &str) -> Result<&[f64]> {
        let (_, d) =
            self.field(name, None).ok_or_else(|| Error::EstfPayload(format!("real field {name} not present")))?;
        Ok(d)
    }

    /// Encodes every finite scale of `stack` as complex fields, and the
    /// static part (if any) as real `*_static` fields repeated over time.
    pub fn from_stack<T: Real>(stack: &ScaleStack<T>) -> Result<Self> {
        let finite: Vec<&AnalyticEMField<T>> = stack.fields.iter().filter(|f| f.scale.is_finite()).collect();
        let static_limit = finite.len() < stack.len();
        let grid = grid_f64(stack.grid());
        let scales = finite.iter().map(|f| f.scale.to_f64_lossy()).collect();
        let mut out = Self::new(&grid, scales, static_limit);
        for f in &finite {
            f.validate()?;
            let ch = f.channels();
            let mut at = 0;
            for (name, comps) in NAMES {
                let data = ch[at..at + comps]
                    .iter()
                    .flat_map(|c| c.iter().flat_map(|z| [z.re.to_f64_lossy(), z.im.to_f64_lossy()]))
                    .collect();
                out.push(name, comps, Some(f.scale.to_f64_lossy()), data);
                at += comps;
            }
        }
        if let Some(dc) = &stack.fields[0].dc {
            let (ns, nt) = (grid.spatial_len(), grid.nt);
            let ch = dc.channels();
            let mut at = 0;
            for (name, comps) in NAMES {
                let data = ch[at..at + comps]
                    .iter()
                    .flat_map(|c| (0..nt * ns).map(move |idx| c[idx % ns].to_f64_lossy()))
                    .collect();
                out.push(&format!("{name}{SUFFIX_STATIC}"), comps, None, data);
                at += comps;
            }
        }
        Ok(out)
    }

    pub fn to_stack<T: Real>(&self) -> Result<ScaleStack<T>> {
        let grid = grid_from_f64(&self.header.grid()?)?;
        let n = grid.len();
        let ns = grid.spatial_len();
        let dc = if self.field(&format!("E{SUFFIX_STATIC}"), None).is_some() {
            let mut s = StaticFields::zeros(ns);
            let [e, h, j] = [&mut s.e, &mut s.h, &mut s.j];
            for (name, dst) in [("E", e), ("H", h), ("J", j)] {
                let data = self.real(&format!("{name}{SUFFIX_STATIC}"))?;
                for (c, d) in dst.iter_mut().enumerate() {
                    *d = data[c * n..c * n + ns].iter().map(|&v| T::lit(v)).collect();
                }
            }
            s.rho = self.real(&format!("rho{SUFFIX_STATIC}"))?[..ns].iter().map(|&v| T::lit(v)).collect();
            Some(s)
        } else {
            None
        };
        let mut fields = Vec::with_capacity(self.header.scales.len() + 1);
        for &s in &self.header.scales {
            let mut f = AnalyticEMField::zeros(grid, T::lit(s));
            let complex = |name: &str| -> Result<Vec<Complex<T>>> {
                let (_, d) = self
                    .field(name, Some(s))
                    .ok_or_else(|| Error::EstfPayload(format!("complex field {name} at s = {s} not present")))?;
                Ok(d.chunks_exact(2).map(|p| Complex::new(T::lit(p[0]), T::lit(p[1]))).collect())
            };
            let [e, h, j] = [&mut f.e, &mut f.h, &mut f.j];
            for (name, dst) in [("E", e), ("H", h), ("J", j)] {
                let data = complex(name)?;
                for (c, d) in dst.iter_mut().enumerate() {
                    *d = data[c * n..(c + 1) * n].to_vec();
                }
            }
            f.rho = complex("rho")?;
            f.dc = dc.clone();
            fields.push(f);
        }
        if self.header.static_limit {
            let mut last = AnalyticEMField::zeros(grid, T::infinity());
            if let Some(s) = &dc {
                let (src, dst) = (s.channels(), [&mut last.e, &mut last.h, &mut last.j]);
                for (k, series) in dst.into_iter().enumerate() {
                    for (c, d) in series.iter_mut().enumerate() {
                        for (idx, z) in d.iter_mut().enumerate() {
                            z.re = src[3 * k + c][idx % ns];
                        }
                    }
                }
                for (idx, z) in last.rho.iter_mut().enumerate() {
                    z.re = s.rho[idx % ns];
                }
            }
            last.dc = dc;
            fields.push(last);
        }
        ScaleStack::new(fields)
    }
}

fn grid_f64<T: Real>(g: &SpaceTimeGrid<T>) -> SpaceTimeGrid<f64> {
    SpaceTimeGrid {
        nx: g.nx,
        ny: g.ny,
        nz: g.nz,
        nt: g.nt,
        dx: g.dx.to_f64_lossy(),
        dy: g.dy.to_f64_lossy(),
        dz: g.dz.to_f64_lossy(),
        dt: g.dt.to_f64_lossy(),
        origin: g.origin.map(|v| v.to_f64_lossy()),
    }
}

fn grid_from_f64<T: Real>(g: &SpaceTimeGrid<f64>) -> Result<SpaceTimeGrid<T>> {
    SpaceTimeGrid::new(
        [g.nx, g.ny, g.nz, g.nt],
        [T::lit(g.dx), T::lit(g.dy), T::lit(g.dz), T::lit(g.dt)],
        g.origin.map(T::lit),
    )
}

/// Reads `path`, re-encodes it and parses the result again. Succeeds when
/// both encodings are byte-identical and the reparsed payload matches.
pub fn round_trip(path: impl AsRef<Path>) -> Result<()> {
    let original = std::fs::read(path)?;
    let parsed = EstfFile::from_bytes(&original)?;
    let encoded = parsed.to_bytes()?;
    if let Some(offset) = first_difference(&original, &encoded) {
        return Err(Error::RoundTripMismatch { offset });
    }
    let again = EstfFile::from_bytes(&encoded)?;
    let a = parsed.payload.iter().flatten().map(|v| v.to_bits());
    let b = again.payload.iter().flatten().map(|v| v.to_bits());
    if let Some(k) = a.zip(b).position(|(x, y)| x != y) {
        return Err(Error::RoundTripMismatch { offset: encoded.len() - parsed.header.payload_len() * 8 + 8 * k });
    }
    Ok(())
}

pub fn first_difference(a: &[u8], b: &[u8]) -> Option<usize> {
    a.iter().zip(b).position(|(x, y)| x != y).or((a.len() != b.len()).then(|| a.len().min(b.len())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{analytic_fields, gen_standing_wave, DcPolicy};
    use crate::kernel::{Boundary, ScaleGrid};

    fn sample() -> EMFieldSample<f64> {
        let h = std::f64::consts::TAU / 16.0;
        let grid = SpaceTimeGrid::zt(4, h, 0.3, 16, h, 0.0).unwrap();
        gen_standing_wave::<f64>(&grid, 1.3, 1.0).unwrap()
    }

    #[test]
    fn sample_survives_bytes() {
        let f = sample();
        let bytes = EstfFile::from_sample(&f).unwrap().to_bytes().unwrap();
        let back: EMFieldSample<f64> = EstfFile::from_bytes(&bytes).unwrap().to_sample().unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn stack_with_static_limit_survives_bytes() {
        let f = sample();
        let scales = ScaleGrid::new(vec![0.1, 0.5]).unwrap().with_static_limit();
        let stack = analytic_fields(&f, &scales, Boundary::Periodic, &DcPolicy::TimeMean).unwrap();
        let bytes = EstfFile::from_stack(&stack).unwrap().to_bytes().unwrap();
        let back: ScaleStack<f64> = EstfFile::from_bytes(&bytes).unwrap().to_stack().unwrap();
        assert_eq!(back.fields, stack.fields);
    }

    #[test]
    fn header_and_payload_violations_are_rejected() {
        let bytes = EstfFile::from_sample(&sample()).unwrap().to_bytes().unwrap();
        let mut trailing = bytes.clone();
        trailing.push(0);
        assert!(matches!(EstfFile::from_bytes(&trailing), Err(Error::EstfPayload(_))));
        assert!(matches!(EstfFile::from_bytes(b"{not json}\n"), Err(Error::EstfHeader(_))));
        let text = String::from_utf8_lossy(&bytes[..bytes.iter().position(|&b| b == b'\n').unwrap()]).into_owned();
        let zero_t = text.replace("\"dims\":[1,1,4,16]", "\"dims\":[1,1,4,0]");
        assert_ne!(zero_t, text);
        assert!(matches!(EstfFile::from_bytes(format!("{zero_t}\n").as_bytes()), Err(Error::EstfHeader(_))));
    }

    #[test]
    fn first_difference_reports_offset() {
        assert_eq!(first_difference(b"abc", b"abc"), None);
        assert_eq!(first_difference(b"abc", b"abd"), Some(2));
        assert_eq!(first_difference(b"abc", b"abcd"), Some(3));
    }
}
