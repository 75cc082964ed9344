//! Half-hourly readings: CSV ingestion and a seeded synthetic generator.
//!
//! CSV schema: header `meter_id,date,r1,...,rd`, readings in kWh with at
//! most three fraction digits.

use std::io::{Read, Write};
use std::path::Path;

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::crypto::FixedPointCodec;
use crate::error::{Error, Result};
use crate::MeterId;

/// One meter-day of fixed-point readings `r_i[1..d]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadingSeries {
    pub meter: MeterId,
    pub day: String,
    pub readings: Vec<i64>,
}

impl ReadingSeries {
    pub fn total(&self) -> i64 {
        self.readings.iter().sum()
    }
}

pub fn read_readings<R: Read>(input: R, codec: &FixedPointCodec, d: usize) -> Result<Vec<ReadingSeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse { row: 1, msg: e.to_string() })?
        .clone();
    if header.len() != d + 2 || &header[0] != "meter_id" || &header[1] != "date" {
        return Err(Error::Parse {
            row: 1,
            msg: format!("expected header meter_id,date,r1..r{d}"),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        // Header is row 1.
        let row = i + 2;
        let rec = rec.map_err(|e| Error::Parse { row, msg: e.to_string() })?;
        if rec.len() != d + 2 {
            return Err(Error::Parse {
                row,
                msg: format!("expected {d} readings, found {}", rec.len().saturating_sub(2)),
            });
        }
        let meter: u32 = rec[0].parse().map_err(|_| Error::Parse {
            row,
            msg: format!("bad meter id {:?}", &rec[0]),
        })?;
        let day = rec[1].to_string();
        NaiveDate::parse_from_str(&day, "%Y-%m-%d").map_err(|_| Error::Parse {
            row,
            msg: format!("bad date {day:?}"),
        })?;
        let mut readings = Vec::with_capacity(d);
        for field in rec.iter().skip(2) {
            let units = codec.parse_reading(field).map_err(|e| match e {
                Error::Range(m) => Error::Range(format!("row {row}: {m}")),
                other => Error::Parse { row, msg: other.to_string() },
            })?;
            if units < 0 {
                return Err(Error::Range(format!("row {row}: negative reading {field}")));
            }
            readings.push(units);
        }
        out.push(ReadingSeries {
            meter: MeterId(meter),
            day,
            readings,
        });
    }
    Ok(out)
}

pub fn load_readings(path: &Path, codec: &FixedPointCodec, d: usize) -> Result<Vec<ReadingSeries>> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Parse { row: 0, msg: format!("{}: {e}", path.display()) })?;
    read_readings(file, codec, d).map_err(|e| e.context(path.display().to_string()))
}

pub fn write_readings<W: Write>(out: W, series: &[ReadingSeries], codec: &FixedPointCodec) -> Result<()> {
    let d = series.first().map_or(0, |s| s.readings.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["meter_id".to_string(), "date".to_string()];
    header.extend((1..=d).map(|t| format!("r{t}")));
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    let digits = codec.reading_digits();
    for s in series {
        let mut row = vec![s.meter.0.to_string(), s.day.clone()];
        row.extend(
            s.readings
                .iter()
                .map(|&u| format!("{:.*}", digits, codec.decode_reading(u))),
        );
        w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// `start + offset` days as `YYYY-MM-DD`.
pub fn day_label(start: &str, offset: usize) -> Result<String> {
    let date = NaiveDate::parse_from_str(start, "%Y-%m-%d")
        .map_err(|_| Error::Parse { row: 0, msg: format!("bad date {start:?}") })?;
    Ok((date + Duration::days(offset as i64)).format("%Y-%m-%d").to_string())
}

/// Label `T_t` of slot `t ∈ 1..=d`: the date and the slot's end time.
pub fn slot_label(day: &str, t: usize, d: usize) -> String {
    let minutes = t * 1440 / d;
    format!("{day}T{:02}:{:02}", minutes / 60, minutes % 60)
}

/// Seeded household load profiles with morning and evening peaks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub meters: usize,
    pub days: usize,
    pub d: usize,
    pub first_meter: u32,
    pub seed: u64,
}

pub const SYNTHETIC_START: &str = "2009-07-15";

pub fn synthetic_readings(spec: &SyntheticSpec, codec: &FixedPointCodec) -> Result<Vec<ReadingSeries>> {
    if spec.d < 2 {
        return Err(Error::Topology("a day needs at least two slots".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let profiles: Vec<(f64, f64, f64)> = (0..spec.meters)
        .map(|_| {
            (
                rng.gen_range(0.08..0.35),
                rng.gen_range(0.2..1.0),
                rng.gen_range(0.4..1.6),
            )
        })
        .collect();
    let mut out = Vec::with_capacity(spec.meters * spec.days);
    for day in 0..spec.days {
        let label = day_label(SYNTHETIC_START, day)?;
        for (i, &(base, morning, evening)) in profiles.iter().enumerate() {
            let level: f64 = rng.gen_range(0.8..1.2);
            let readings = (0..spec.d)
                .map(|t| {
                    let hour = (t as f64 + 0.5) * 24.0 / spec.d as f64;
                    let bump = |centre: f64, width: f64| (-((hour - centre) / width).powi(2)).exp();
                    let mean = base + morning * bump(8.0, 1.5) + evening * bump(19.0, 2.0);
                    let kwh = (mean * level * rng.gen_range(0.7..1.3)).clamp(0.0, 10.0);
                    codec.encode_reading(kwh)
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(ReadingSeries {
                meter: MeterId(spec.first_meter + i as u32),
                day: label.clone(),
                readings,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = include_str!("../../fixtures/sample_readings.csv");

    #[test]
    fn bundled_sample_loads() {
        let s = read_readings(SAMPLE.as_bytes(), &FixedPointCodec::default(), 48).unwrap();
        assert_eq!(s.len(), 5);
        assert!(s.iter().all(|x| x.readings.len() == 48));
        assert_eq!(s[0].meter, MeterId(1001));
    }

    #[test]
    fn rejects_short_rows_and_negatives() {
        let c = FixedPointCodec::default();
        let header: String = std::iter::once("meter_id,date".to_string())
            .chain((1..=48).map(|t| format!("r{t}")))
            .collect::<Vec<_>>()
            .join(",");
        let row47 = vec!["0.5"; 47].join(",");
        let text = format!("{header}\n1,2009-07-15,{row47}\n");
        assert!(matches!(
            read_readings(text.as_bytes(), &c, 48),
            Err(Error::Parse { row: 2, .. })
        ));
        let neg = format!("{header}\n1,2009-07-15,-0.1,{}\n", vec!["0.5"; 47].join(","));
        assert!(matches!(read_readings(neg.as_bytes(), &c, 48), Err(Error::Range(_))));
        let many = format!("{header}\n1,2009-07-15,0.1234,{}\n", vec!["0.5"; 47].join(","));
        assert!(matches!(
            read_readings(many.as_bytes(), &c, 48),
            Err(Error::Parse { row: 2, .. })
        ));
    }

    #[test]
    fn write_then_read_is_identity() {
        let c = FixedPointCodec::default();
        let spec = SyntheticSpec {
            meters: 3,
            days: 2,
            d: 48,
            first_meter: 1,
            seed: 5,
        };
        let s = synthetic_readings(&spec, &c).unwrap();
        let mut buf = Vec::new();
        write_readings(&mut buf, &s, &c).unwrap();
        assert_eq!(read_readings(buf.as_slice(), &c, 48).unwrap(), s);
        assert_eq!(synthetic_readings(&spec, &c).unwrap(), s);
    }

    #[test]
    fn labels() {
        assert_eq!(slot_label("2009-07-15", 1, 48), "2009-07-15T00:30");
        assert_eq!(slot_label("2009-07-15", 48, 48), "2009-07-15T24:00");
        assert_eq!(day_label("2009-07-31", 1).unwrap(), "2009-08-01");
    }
}
