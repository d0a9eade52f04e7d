use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

/// A finite persistence interval `[birth, death)` in radius units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub birth: f64,
    pub death: f64,
}

impl Interval {
    pub fn new(birth: f64, death: f64) -> Result<Self> {
        let it = Interval { birth, death };
        match it.violation() {
            Some(msg) => input(msg),
            None => Ok(it),
        }
    }

    pub fn length(&self) -> f64 {
        self.death - self.birth
    }

    fn violation(&self) -> Option<String> {
        if !(self.birth >= 0.0) {
            Some(format!("birth {} is negative or NaN", self.birth))
        } else if !self.death.is_finite() {
            Some(format!("death {} is not finite", self.death))
        } else if !(self.birth < self.death) {
            Some(format!("birth {} is not before death {}", self.birth, self.death))
        } else {
            None
        }
    }
}

/// Reduced persistence barcode over `Z/2`, one interval multiset per degree.
///
/// Classes that never die are kept apart in [`Barcode::essential`]: in degree 0
/// the single class of the final connected component is removed, so for a
/// connected final complex there are none.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Barcode {
    finite: Vec<Vec<Interval>>,
    essential: Vec<Vec<f64>>,
}

fn sort_intervals(v: &mut [Interval]) {
    v.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(a.death.total_cmp(&b.death)));
}

impl Barcode {
    pub fn empty(max_degree: usize) -> Self {
        Barcode {
            finite: vec![Vec::new(); max_degree + 1],
            essential: vec![Vec::new(); max_degree + 1],
        }
    }

    /// Assembles a barcode without validating intervals; see [`Barcode::violations`].
    pub fn from_parts(mut finite: Vec<Vec<Interval>>, mut essential: Vec<Vec<f64>>) -> Self {
        let degrees = finite.len().max(essential.len()).max(1);
        finite.resize(degrees, Vec::new());
        essential.resize(degrees, Vec::new());
        finite.iter_mut().for_each(|v| sort_intervals(v));
        essential.iter_mut().for_each(|v| v.sort_by(f64::total_cmp));
        Barcode { finite, essential }
    }

    pub fn max_degree(&self) -> usize {
        self.finite.len() - 1
    }

    /// Finite intervals in degree `i`, sorted by `(birth, death)`.
    pub fn intervals(&self, i: usize) -> &[Interval] {
        self.finite.get(i).map_or(&[], Vec::as_slice)
    }

    /// Birth values of classes in degree `i` that never die.
    pub fn essential(&self, i: usize) -> &[f64] {
        self.essential.get(i).map_or(&[], Vec::as_slice)
    }

    /// `|PH_i|`, the number of finite intervals in degree `i`.
    pub fn count(&self, i: usize) -> usize {
        self.intervals(i).len()
    }

    pub fn total_finite(&self) -> usize {
        self.finite.iter().map(Vec::len).sum()
    }

    pub fn total_essential(&self) -> usize {
        self.essential.iter().map(Vec::len).sum()
    }

    /// Every broken interval invariant, as readable messages.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, v) in self.finite.iter().enumerate() {
            for it in v {
                if let Some(msg) = it.violation() {
                    out.push(format!("degree {i}: {msg}"));
                }
            }
        }
        for (i, v) in self.essential.iter().enumerate() {
            for b in v {
                if !(b.is_finite() && *b >= 0.0) {
                    out.push(format!("degree {i}: essential class born at {b}"));
                }
            }
        }
        out
    }

    /// The barcode of the point set dilated by `factor`.
    pub fn scaled(&self, factor: f64) -> Barcode {
        Barcode {
            finite: self
                .finite
                .iter()
                .map(|v| {
                    v.iter()
                        .map(|it| Interval {
                            birth: it.birth * factor,
                            death: it.death * factor,
                        })
                        .collect()
                })
                .collect(),
            essential: self
                .essential
                .iter()
                .map(|v| v.iter().map(|b| b * factor).collect())
                .collect(),
        }
    }

    /// Writes `degree,birth,death` rows; essential classes carry death `inf`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["degree", "birth", "death"])?;
        for i in 0..self.finite.len() {
            for it in &self.finite[i] {
                w.write_record([i.to_string(), it.birth.to_string(), it.death.to_string()])?;
            }
            for b in &self.essential[i] {
                w.write_record([i.to_string(), b.to_string(), "inf".to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut finite: Vec<Vec<Interval>> = Vec::new();
        let mut essential: Vec<Vec<f64>> = Vec::new();
        for record in r.records() {
            let record = record?;
            if record.len() != 3 {
                return input("barcode rows need degree,birth,death");
            }
            let bad = |f: &str| Error::Input(format!("bad barcode field `{f}`"));
            let degree: usize = record[0].trim().parse().map_err(|_| bad(&record[0]))?;
            let birth: f64 = record[1].trim().parse().map_err(|_| bad(&record[1]))?;
            if finite.len() <= degree {
                finite.resize(degree + 1, Vec::new());
                essential.resize(degree + 1, Vec::new());
            }
            if record[2].trim() == "inf" {
                essential[degree].push(birth);
            } else {
                let death: f64 = record[2].trim().parse().map_err(|_| bad(&record[2]))?;
                finite[degree].push(Interval { birth, death });
            }
        }
        Ok(Self::from_parts(finite, essential))
    }
}

/// `N(b, d)`: degree-`i` intervals born strictly before `b` and dying strictly after `d`.
pub fn count_spanning(bc: &Barcode, i: usize, b: f64, d: f64) -> Result<usize> {
    if !(b < d) {
        return input(format!("count window needs b < d, got ({b}, {d})"));
    }
    Ok(bc
        .intervals(i)
        .iter()
        .filter(|it| it.birth < b && it.death > d)
        .count())
}

/// Number of degree-`i` intervals longer than `delta`.
pub fn count_longer(bc: &Barcode, i: usize, delta: f64) -> usize {
    bc.intervals(i).iter().filter(|it| it.length() > delta).count()
}
