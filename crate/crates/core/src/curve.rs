//! Closed curves sampled on the uniform grid `t_k = k/M` of the circle ℝ/ℤ.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hexfloat;
use crate::rotation::RotationNumber;

/// Where a sampled curve came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveSource {
    /// Image of the circle of radius `radius` under the linearizing map.
    Series {
        theta: RotationNumber,
        #[serde(with = "hexfloat::as_hex")]
        radius: f64,
        series_len: usize,
    },
    Synthetic {
        name: String,
    },
    Imported,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledCurve {
    points: Vec<Complex64>,
    source: CurveSource,
}

impl SampledCurve {
    pub const MIN_SAMPLES: usize = 16;

    pub fn new(points: Vec<Complex64>, source: CurveSource) -> Result<Self> {
        let m = points.len();
        if m < Self::MIN_SAMPLES {
            return Err(Error::DegenerateCurve(format!(
                "{m} samples, need at least {}",
                Self::MIN_SAMPLES
            )));
        }
        if let Some(k) = points
            .iter()
            .position(|p| !(p.re.is_finite() && p.im.is_finite()))
        {
            return Err(Error::DegenerateCurve(format!("sample {k} is not finite")));
        }
        for k in 0..m {
            if points[k] == points[(k + 1) % m] {
                return Err(Error::DegenerateCurve(format!(
                    "consecutive samples {k} and {} coincide",
                    (k + 1) % m
                )));
            }
        }
        Ok(SampledCurve { points, source })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Sample at index `k`, read periodically.
    pub fn point(&self, k: usize) -> Complex64 {
        self.points[k % self.points.len()]
    }

    /// Parameter `t_k = k/M`.
    pub fn param(&self, k: usize) -> f64 {
        k as f64 / self.points.len() as f64
    }

    pub fn source(&self) -> &CurveSource {
        &self.source
    }

    /// Applies `f` to every sample, keeping the source.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        Self::new(
            self.points.iter().map(|&p| f(p)).collect(),
            self.source.clone(),
        )
    }

    /// Writes `k,t_k,re,im` rows with hexadecimal floats.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "t_k", "re", "im"])?;
        for (k, p) in self.points.iter().enumerate() {
            w.write_record([
                k.to_string(),
                hexfloat::format(self.param(k)),
                hexfloat::format(p.re),
                hexfloat::format(p.im),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["k", "t_k", "re", "im"] {
            return Err(Error::Parse(format!(
                "expected header k,t_k,re,im, got {:?}",
                headers.iter().collect::<Vec<_>>()
            )));
        }
        let mut points = Vec::new();
        for (row, record) in r.records().enumerate() {
            let record = record?;
            let k: usize = record[0]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("row {row}: bad index {:?}", &record[0])))?;
            if k != row {
                return Err(Error::Parse(format!("row {row}: index {k} out of order")));
            }
            points.push(Complex64::new(
                hexfloat::parse(&record[2])?,
                hexfloat::parse(&record[3])?,
            ));
        }
        if points.is_empty() {
            return Err(Error::Parse("curve file has no samples".into()));
        }
        Self::new(points, CurveSource::Imported)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CurveRecord::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: CurveRecord = serde_json::from_str(text)?;
        let points = record
            .points
            .iter()
            .map(|[re, im]| Ok(Complex64::new(hexfloat::parse(re)?, hexfloat::parse(im)?)))
            .collect::<Result<Vec<_>>>()?;
        if points.len() != record.samples {
            return Err(Error::Parse(format!(
                "header announces {} samples, found {}",
                record.samples,
                points.len()
            )));
        }
        Self::new(points, record.source)
    }
}

#[derive(Serialize, Deserialize)]
struct CurveRecord {
    samples: usize,
    source: CurveSource,
    points: Vec<[String; 2]>,
}

impl From<&SampledCurve> for CurveRecord {
    fn from(c: &SampledCurve) -> Self {
        CurveRecord {
            samples: c.len(),
            source: c.source.clone(),
            points: c
                .points
                .iter()
                .map(|p| [hexfloat::format(p.re), hexfloat::format(p.im)])
                .collect(),
        }
    }
}

/// Synthetic fixtures with known geometry.
pub mod synthetic {
    use std::f64::consts::{PI, TAU};

    use num_complex::Complex64;

    use super::{CurveSource, SampledCurve};
    use crate::error::Result;

    fn named(points: Vec<Complex64>, name: &str) -> Result<SampledCurve> {
        SampledCurve::new(
            points,
            CurveSource::Synthetic {
                name: name.to_string(),
            },
        )
    }

    pub fn circle(m: usize, radius: f64, center: Complex64) -> Result<SampledCurve> {
        let points = (0..m)
            .map(|k| center + Complex64::from_polar(radius, TAU * k as f64 / m as f64))
            .collect();
        named(points, "circle")
    }

    /// Ellipse `x²/a² + y²/b² = 1`, sampled uniformly in the angle parameter.
    pub fn ellipse(m: usize, a: f64, b: f64) -> Result<SampledCurve> {
        let points = (0..m)
            .map(|k| {
                let t = TAU * k as f64 / m as f64;
                Complex64::new(a * t.cos(), b * t.sin())
            })
            .collect();
        named(points, "ellipse")
    }

    /// Resamples a closed polygon at `m` points equally spaced in arc length,
    /// starting at `vertices[0]`.
    pub fn resample_closed_polyline(vertices: &[Complex64], m: usize) -> Vec<Complex64> {
        let n = vertices.len();
        let seg_len: Vec<f64> = (0..n)
            .map(|i| (vertices[(i + 1) % n] - vertices[i]).norm())
            .collect();
        let total: f64 = seg_len.iter().sum();
        let mut out = Vec::with_capacity(m);
        let mut seg = 0;
        let mut seg_start = 0.0;
        for k in 0..m {
            let s = total * k as f64 / m as f64;
            while seg + 1 < n && seg_start + seg_len[seg] <= s {
                seg_start += seg_len[seg];
                seg += 1;
            }
            let u = if seg_len[seg] > 0.0 {
                (s - seg_start) / seg_len[seg]
            } else {
                0.0
            };
            out.push(vertices[seg] + (vertices[(seg + 1) % n] - vertices[seg]) * u);
        }
        out
    }

    /// Two unit circles joined by a straight neck of width `neck_width`
    /// and length about one, sampled uniformly in arc length.
    pub fn dumbbell(m: usize, neck_width: f64) -> Result<SampledCurve> {
        let half = neck_width / 2.0;
        let offset = 1.5;
        let attach = half.asin();
        let arc_steps = 4096;
        let mut vertices = Vec::new();
        // right lobe, counter-clockwise from the upper neck junction
        for s in 0..=arc_steps {
            let a = PI - attach - (TAU - 2.0 * attach) * s as f64 / arc_steps as f64;
            vertices.push(Complex64::new(offset, 0.0) + Complex64::from_polar(1.0, a));
        }
        // lower neck runs leftwards, then the left lobe
        for s in 0..=arc_steps {
            let a = -attach - (TAU - 2.0 * attach) * s as f64 / arc_steps as f64;
            vertices.push(Complex64::new(-offset, 0.0) + Complex64::from_polar(1.0, a));
        }
        // vertices trace the curve clockwise; reverse for positive orientation
        vertices.reverse();
        named(resample_closed_polyline(&vertices, m), "dumbbell")
    }

    /// Vertices of the Koch snowflake after `depth` refinements
    /// (`3·4^depth` equal segments), positively oriented.
    pub fn koch_snowflake(depth: u32) -> Result<SampledCurve> {
        let corners: Vec<Complex64> = (0..3)
            .map(|k| Complex64::from_polar(1.0, PI / 2.0 - TAU * k as f64 / 3.0))
            .collect();
        let mut vertices = Vec::with_capacity(3 * 4usize.pow(depth));
        let rot = Complex64::from_polar(1.0, PI / 3.0);
        for side in 0..3 {
            let (a, b) = (corners[side], corners[(side + 1) % 3]);
            let mut path = vec![a, b];
            for _ in 0..depth {
                let mut next = Vec::with_capacity(4 * path.len());
                for w in path.windows(2) {
                    let (p, q) = (w[0], w[1]);
                    let d = (q - p) / 3.0;
                    // the base triangle runs clockwise, so outward is a left turn
                    next.extend([p, p + d, p + d + d * rot, p + d * 2.0]);
                }
                next.push(*path.last().unwrap());
                path = next;
            }
            path.pop();
            vertices.extend(path);
        }
        vertices.reverse();
        named(vertices, "koch")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_samples() {
        let pts = vec![Complex64::new(0.0, 0.0); 32];
        assert!(matches!(
            SampledCurve::new(pts, CurveSource::Imported),
            Err(Error::DegenerateCurve(_))
        ));
        let few = synthetic::circle(8, 1.0, Complex64::new(0.0, 0.0));
        assert!(few.is_err());
    }

    #[test]
    fn csv_and_json_roundtrip() {
        let c = synthetic::ellipse(64, 2.0, 1.0).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let back = SampledCurve::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.points(), c.points());

        let json = c.to_json().unwrap();
        let back = SampledCurve::from_json(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn empty_csv_is_an_error() {
        assert!(SampledCurve::read_csv("".as_bytes()).is_err());
        assert!(SampledCurve::read_csv("k,t_k,re,im\n".as_bytes()).is_err());
    }

    #[test]
    fn koch_vertex_count_and_spacing() {
        let k = synthetic::koch_snowflake(3).unwrap();
        assert_eq!(k.len(), 3 * 64);
        let side = 3f64.sqrt() / 27.0;
        for i in 0..k.len() {
            let d = (k.point(i + 1) - k.point(i)).norm();
            assert!((d - side).abs() < 1e-12);
        }
    }

    #[test]
    fn dumbbell_is_closed_and_uniform() {
        let d = synthetic::dumbbell(1024, 0.01).unwrap();
        let steps: Vec<f64> = (0..d.len())
            .map(|i| (d.point(i + 1) - d.point(i)).norm())
            .collect();
        let max = steps.iter().cloned().fold(0.0, f64::max);
        let min = steps.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max < 0.02 && min > 0.005, "{min} {max}");
    }
}
