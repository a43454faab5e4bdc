//! CSV schemas: rounds (`index,type,x,y,a,b`), sweep
//! (`noise,mean_s,std_s,qber_pre,qber_post,reps`) and heatmap
//! (`noise,pass,ratio`, with `NA` for rows without initial errors).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::heatmap::Heatmap;
use super::sweep::SweepRow;
use crate::error::{Error, Result};
use crate::protocol::{RoundRecord, RoundType};
use crate::statistics::Outcome;

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

#[derive(Debug, Serialize, Deserialize)]
struct RoundRow {
    index: usize,
    #[serde(rename = "type")]
    round_type: String,
    x: usize,
    y: usize,
    a: i64,
    b: i64,
}

pub fn write_rounds<W: Write>(out: W, records: &[RoundRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(RoundRow {
            index: r.index,
            round_type: match r.round_type {
                RoundType::Test => "test".into(),
                RoundType::Key => "key".into(),
            },
            x: r.x,
            y: r.y,
            a: r.a.value().into(),
            b: r.b.value().into(),
        })
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rounds<R: Read>(input: R) -> Result<Vec<RoundRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    rd.deserialize::<RoundRow>()
        .map(|row| {
            let row = row.map_err(csv_err)?;
            let outcome = |v| Outcome::from_value(v).ok_or_else(|| Error::Parse(format!("outcome {v} is not ±1")));
            Ok(RoundRecord {
                index: row.index,
                round_type: match row.round_type.as_str() {
                    "test" => RoundType::Test,
                    "key" => RoundType::Key,
                    other => return Err(Error::Parse(format!("unknown round type {other:?}"))),
                },
                x: row.x,
                y: row.y,
                a: outcome(row.a)?,
                b: outcome(row.b)?,
            })
        })
        .collect()
}

pub fn write_sweep<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    csv::Reader::from_reader(input).deserialize().map(|r| r.map_err(csv_err)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub noise: f64,
    pub pass: usize,
    /// `None` is written as `NA`.
    #[serde(with = "na_float")]
    pub ratio: Option<f64>,
}

mod na_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_str("NA"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        let s = String::deserialize(d)?;
        if s == "NA" {
            return Ok(None);
        }
        s.parse().map(Some).map_err(serde::de::Error::custom)
    }
}

pub fn heatmap_cells(map: &Heatmap) -> Vec<HeatmapCell> {
    map.rows
        .iter()
        .flat_map(|row| {
            (0..=map.passes).map(move |pass| HeatmapCell {
                noise: row.noise,
                pass,
                ratio: row.ratios.as_ref().map(|r| r[pass]),
            })
        })
        .collect()
}

pub fn write_heatmap<W: Write>(out: W, map: &Heatmap) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for cell in heatmap_cells(map) {
        w.serialize(cell).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_heatmap<R: Read>(input: R) -> Result<Vec<HeatmapCell>> {
    csv::Reader::from_reader(input).deserialize().map(|r| r.map_err(csv_err)).collect()
}
