//! JSON serialization with every floating-point number printed at 17
//! significant digits (`{:.16e}`), so reports round-trip exactly and
//! identical runs produce byte-identical documents.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

#[derive(Default)]
pub struct SciFormatter;

impl Formatter for SciFormatter {
    fn write_f64<W: io::Write + ?Sized>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: io::Write + ?Sized>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes a document to compact JSON with 17-significant-digit
/// floats.
pub fn to_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value
        .serialize(&mut ser)
        .expect("report serialization cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// The same 17-significant-digit convention for CSV fields.
pub fn csv_f64(value: f64) -> String {
    format!("{value:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_17_significant_digits() {
        #[derive(Serialize)]
        struct Doc {
            x: f64,
            n: u32,
        }
        let json = to_string(&Doc { x: 0.5, n: 3 });
        assert_eq!(json, r#"{"x":5.0000000000000000e-1,"n":3}"#);
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["x"].as_f64(), Some(0.5));
    }

    #[test]
    fn csv_floats_round_trip() {
        for v in [0.0, -1.5, 9.497412215186, 1e-300] {
            assert_eq!(csv_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
