//! Report schema and the JSON writer.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use graftlab_core::holonomy::TWIST_SIGN;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        ComplexValue { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub index: usize,
    pub label: String,
    pub inputs: Value,
    pub measured: Value,
    pub defect: f64,
    /// Threshold for `defect`; the suite tolerance unless the check has a
    /// fixed one of its own.
    pub tolerance: f64,
    pub ok: bool,
}

impl SampleRecord {
    pub fn new(label: &str, inputs: Value, measured: Value, defect: f64, tolerance: f64) -> Self {
        SampleRecord {
            index: 0,
            label: label.to_string(),
            inputs,
            measured,
            defect,
            tolerance,
            ok: defect <= tolerance,
        }
    }

    pub fn failed(label: &str, inputs: Value, error: String, tolerance: f64) -> Self {
        SampleRecord {
            index: 0,
            label: label.to_string(),
            inputs,
            measured: serde_json::json!({ "error": error }),
            defect: f64::INFINITY,
            tolerance,
            ok: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConstantEstimates {
    pub kappa: Option<ComplexValue>,
    pub pullback_ratio: Option<ComplexValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub pass: bool,
    pub constant_estimates: ConstantEstimates,
    pub max_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conventions {
    pub twist_sign: String,
    pub angle_convention: String,
    pub branch: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            twist_sign: TWIST_SIGN.to_string(),
            angle_convention: "exterior".to_string(),
            branch: "complex length 2 log mu, mu the larger-modulus eigenvalue, imaginary part in (-pi, pi]; \
                     principal dilogarithm"
                .to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub genus: usize,
    pub seed: u64,
    pub h: f64,
    pub tol: f64,
    pub samples: Vec<SampleRecord>,
    pub summary: Summary,
    pub conventions: Conventions,
}

impl VerificationReport {
    /// Numbers the records and fills in the summary. `max_defect` is taken
    /// over the records checked against the suite tolerance; fixed-threshold
    /// checks enter through their status.
    pub fn assemble(
        suite: &str,
        genus: usize,
        seed: u64,
        h: f64,
        tol: f64,
        mut samples: Vec<SampleRecord>,
        constant_estimates: ConstantEstimates,
    ) -> Self {
        for (i, s) in samples.iter_mut().enumerate() {
            s.index = i;
        }
        let max_defect = samples
            .iter()
            .filter(|s| s.tolerance == tol)
            .map(|s| s.defect)
            .fold(0.0, f64::max);
        let pass = max_defect <= tol && samples.iter().all(|s| s.ok);
        VerificationReport {
            suite: suite.to_string(),
            genus,
            seed,
            h,
            tol,
            samples,
            summary: Summary {
                pass,
                constant_estimates,
                max_defect,
            },
            conventions: Conventions::default(),
        }
    }
}

/// Pretty printer that writes every float with 17 significant digits.
struct Digits17(PrettyFormatter<'static>);

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// JSON text of `value`, floats as `d.dddddddddddddddde±x`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}
