use rayon::prelude::*;
use serde::Serialize;

use super::{fluctuation_at, profile_of, segment_variances_with, MfdfaConfig, PolyBasis};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::ReturnSeries;
use crate::tsv;

/// A `(q, s)` cell whose fluctuation is undefined (zero segment variance
/// with `q <= 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegenerateCell {
    pub q: f64,
    pub s: usize,
}

/// `F_q(s)` over a q-grid and a scale grid. Degenerate cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationSurface<T> {
    q_grid: Vec<T>,
    scale_grid: Vec<usize>,
    /// Row-major by q.
    values: Vec<Option<T>>,
    /// `2 N_s` per scale; empty when read back from TSV.
    segment_counts: Vec<usize>,
}

impl<T: Scalar> FluctuationSurface<T> {
    /// Builds a surface from explicit values, `values[qi][si]`.
    pub fn from_values(q_grid: Vec<T>, scale_grid: Vec<usize>, values: Vec<Vec<Option<T>>>) -> Result<Self> {
        if values.len() != q_grid.len() || values.iter().any(|row| row.len() != scale_grid.len()) {
            return Err(Error::InvalidArgument("surface dimensions do not match the grids".into()));
        }
        for v in values.iter().flatten().flatten() {
            if !(*v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("fluctuation value {v} is not positive and finite")));
            }
        }
        Ok(Self { q_grid, scale_grid, values: values.into_iter().flatten().collect(), segment_counts: Vec::new() })
    }

    pub fn q_grid(&self) -> &[T] {
        &self.q_grid
    }

    pub fn scale_grid(&self) -> &[usize] {
        &self.scale_grid
    }

    pub fn segment_counts(&self) -> &[usize] {
        &self.segment_counts
    }

    pub fn get(&self, qi: usize, si: usize) -> Option<T> {
        self.values[qi * self.scale_grid.len() + si]
    }

    /// `F_q(s)` for one q across all scales.
    pub fn row(&self, qi: usize) -> &[Option<T>] {
        let ns = self.scale_grid.len();
        &self.values[qi * ns..(qi + 1) * ns]
    }

    pub fn degenerate_cells(&self) -> Vec<DegenerateCell> {
        let ns = self.scale_grid.len();
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_none())
            .map(|(i, _)| DegenerateCell { q: self.q_grid[i / ns].as_f64(), s: self.scale_grid[i % ns] })
            .collect()
    }

    /// Fails with the first degenerate cell, if any.
    pub fn require_complete(&self) -> Result<()> {
        match self.degenerate_cells().first() {
            Some(c) => Err(Error::DegenerateSegment { q: c.q, s: Some(c.s) }),
            None => Ok(()),
        }
    }

    /// Columns `s`, then `F_q=<q>` per q; values in 10-digit scientific
    /// notation, `nan` for degenerate cells.
    pub fn to_tsv(&self) -> String {
        let header: Vec<String> = std::iter::once("s".to_string())
            .chain(self.q_grid.iter().map(|&q| format!("F_q={}", tsv::short(q))))
            .collect();
        let rows = self.scale_grid.iter().enumerate().map(|(si, s)| {
            std::iter::once(s.to_string())
                .chain((0..self.q_grid.len()).map(|qi| self.get(qi, si).map_or_else(|| "nan".to_string(), tsv::sci10)))
                .collect()
        });
        tsv::render(&header, rows)
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Tsv("empty surface file".into()))?;
        let mut cols = header.split('\t');
        if cols.next() != Some("s") {
            return Err(Error::Tsv("first column must be `s`".into()));
        }
        let q_grid = cols
            .map(|c| {
                c.strip_prefix("F_q=")
                    .and_then(|v| v.parse::<f64>().ok())
                    .map(T::of)
                    .ok_or_else(|| Error::Tsv(format!("bad column label `{c}`")))
            })
            .collect::<Result<Vec<T>>>()?;
        let mut scale_grid = Vec::new();
        let mut by_scale: Vec<Vec<Option<T>>> = Vec::new();
        for (i, line) in lines.enumerate() {
            let mut cells = line.split('\t');
            let s = cells
                .next()
                .and_then(|c| c.parse::<usize>().ok())
                .ok_or_else(|| Error::Tsv(format!("row {}: bad scale", i + 2)))?;
            let row = cells
                .map(|c| match c {
                    "nan" => Ok(None),
                    _ => {
                        c.parse::<f64>().map(|v| Some(T::of(v))).map_err(|e| Error::Tsv(format!("row {}: {e}", i + 2)))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != q_grid.len() {
                return Err(Error::Tsv(format!(
                    "row {} has {} values for {} q columns",
                    i + 2,
                    row.len(),
                    q_grid.len()
                )));
            }
            scale_grid.push(s);
            by_scale.push(row);
        }
        let values = (0..q_grid.len()).map(|qi| by_scale.iter().map(|r| r[qi]).collect()).collect();
        Self::from_values(q_grid, scale_grid, values)
    }
}

/// Evaluates `F_q(s)` on every grid cell. Scales are processed in
/// parallel; each cell is a pure function of its inputs, so the result
/// does not depend on scheduling.
pub fn fluctuation_surface<T: Scalar>(x: &ReturnSeries<T>, cfg: &MfdfaConfig<T>) -> Result<FluctuationSurface<T>> {
    cfg.validate(x.len())?;
    let profile = profile_of(x.values())?;
    let y = profile.values();

    let columns: Vec<(usize, Vec<Option<T>>)> = cfg
        .scale_grid
        .par_iter()
        .map(|&s| -> Result<(usize, Vec<Option<T>>)> {
            let basis = PolyBasis::new(s, cfg.detrend_order)?;
            let variances = segment_variances_with(y, &basis)?;
            let column = cfg
                .q_grid
                .iter()
                .map(|&q| match fluctuation_at(&variances, q) {
                    Ok(f) => Ok(Some(f)),
                    Err(Error::DegenerateSegment { .. }) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((variances.len(), column))
        })
        .collect::<Result<_>>()?;

    let nq = cfg.q_grid.len();
    let ns = cfg.scale_grid.len();
    let mut values = vec![None; nq * ns];
    for (si, (_, column)) in columns.iter().enumerate() {
        for (qi, v) in column.iter().enumerate() {
            values[qi * ns + si] = *v;
        }
    }
    let surface = FluctuationSurface {
        q_grid: cfg.q_grid.clone(),
        scale_grid: cfg.scale_grid.clone(),
        values,
        segment_counts: columns.iter().map(|(c, _)| *c).collect(),
    };
    let degenerate = surface.degenerate_cells();
    if !degenerate.is_empty() {
        log::warn!(
            "{}: {} degenerate (q, s) cells (zero segment variance), first at q={} s={}",
            x.label(),
            degenerate.len(),
            degenerate[0].q,
            degenerate[0].s
        );
    }
    Ok(surface)
}
