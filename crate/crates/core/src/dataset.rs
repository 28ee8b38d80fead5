//! Grouped multi-environment data: `E` environments, each an `N`-position
//! block of `d` categorical variables.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::table::{Axis, AxisKey};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExchangeableDataset {
    num_envs: usize,
    num_positions: usize,
    cardinalities: Vec<usize>,
    // env-major, then position, then variable
    values: Vec<u32>,
}

impl ExchangeableDataset {
    pub fn new(num_envs: usize, num_positions: usize, cardinalities: Vec<usize>, values: Vec<u32>) -> Result<Self> {
        if num_envs == 0 || num_positions == 0 || cardinalities.is_empty() {
            return Err(Error::invalid(
                "dataset needs at least one environment, position and variable",
            ));
        }
        if let Some(c) = cardinalities.iter().find(|&&c| c < 1) {
            return Err(Error::invalid(format!("invalid cardinality {c}")));
        }
        let d = cardinalities.len();
        if values.len() != num_envs * num_positions * d {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {num_envs} x {num_positions} x {d}",
                values.len()
            )));
        }
        for (k, &v) in values.iter().enumerate() {
            let var = k % d;
            if v as usize >= cardinalities[var] {
                let pos = (k / d) % num_positions;
                return Err(Error::ValueOutOfRange {
                    axis: AxisKey::new(var, pos),
                    value: v as usize,
                    card: cardinalities[var],
                });
            }
        }
        Ok(ExchangeableDataset {
            num_envs,
            num_positions,
            cardinalities,
            values,
        })
    }

    pub fn num_envs(&self) -> usize {
        self.num_envs
    }

    pub fn num_positions(&self) -> usize {
        self.num_positions
    }

    pub fn num_vars(&self) -> usize {
        self.cardinalities.len()
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    pub fn get(&self, env: usize, pos: usize, var: usize) -> usize {
        self.values[self.offset(env, pos, var)] as usize
    }

    pub fn value(&self, env: usize, key: AxisKey) -> usize {
        self.get(env, key.pos, key.var)
    }

    /// All `N * d` values of one environment, position-major.
    pub fn block(&self, env: usize) -> &[u32] {
        let w = self.num_positions * self.num_vars();
        &self.values[env * w..(env + 1) * w]
    }

    /// Axes of one block, ordered position-major: (0,0), (1,0), ..., (0,1), ...
    pub fn block_axes(&self) -> Vec<Axis> {
        (0..self.num_positions)
            .flat_map(|pos| {
                self.cardinalities
                    .iter()
                    .enumerate()
                    .map(move |(var, &card)| Axis::new(var, pos, card))
            })
            .collect()
    }

    pub fn axis(&self, key: AxisKey) -> Result<Axis> {
        if key.var >= self.num_vars() || key.pos >= self.num_positions {
            return Err(Error::UnknownAxis(key));
        }
        Ok(Axis {
            key,
            card: self.cardinalities[key.var],
        })
    }

    /// Same data with variables `a` and `b` exchanged.
    pub fn swap_vars(&self, a: usize, b: usize) -> Result<Self> {
        let d = self.num_vars();
        if a >= d || b >= d {
            return Err(Error::invalid(format!("variable index out of range for d={d}")));
        }
        let mut cards = self.cardinalities.clone();
        cards.swap(a, b);
        let mut values = self.values.clone();
        for row in values.chunks_mut(d) {
            row.swap(a, b);
        }
        Ok(ExchangeableDataset {
            cardinalities: cards,
            values,
            ..self.clone()
        })
    }

    /// Reorders positions within every environment: new position `n` holds old position `perm[n]`.
    pub fn permute_positions(&self, perm: &[usize]) -> Result<Self> {
        let n = self.num_positions;
        let mut check = perm.to_vec();
        check.sort_unstable();
        if check != (0..n).collect::<Vec<_>>() {
            return Err(Error::invalid("not a permutation of positions"));
        }
        let d = self.num_vars();
        let mut values = Vec::with_capacity(self.values.len());
        for env in 0..self.num_envs {
            let block = self.block(env);
            for &old in perm {
                values.extend_from_slice(&block[old * d..(old + 1) * d]);
            }
        }
        Ok(ExchangeableDataset { values, ..self.clone() })
    }

    /// Keeps only the first `count` environments.
    pub fn truncate_envs(&self, count: usize) -> Result<Self> {
        if count == 0 || count > self.num_envs {
            return Err(Error::invalid(format!(
                "cannot keep {count} of {} environments",
                self.num_envs
            )));
        }
        let w = self.num_positions * self.num_vars();
        Ok(ExchangeableDataset {
            num_envs: count,
            values: self.values[..count * w].to_vec(),
            ..self.clone()
        })
    }

    fn offset(&self, env: usize, pos: usize, var: usize) -> usize {
        (env * self.num_positions + pos) * self.num_vars() + var
    }

    /// Writes `env,pos,x0,x1,...` rows, one per (environment, position).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["env".to_string(), "pos".to_string()];
        header.extend((0..self.num_vars()).map(|i| format!("x{i}")));
        w.write_record(&header).map_err(csv_err)?;
        for env in 0..self.num_envs {
            for pos in 0..self.num_positions {
                let mut row = vec![env.to_string(), pos.to_string()];
                row.extend((0..self.num_vars()).map(|v| self.get(env, pos, v).to_string()));
                w.write_record(&row).map_err(csv_err)?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Reads the CSV layout written by [`write_csv`](Self::write_csv).
    ///
    /// Cardinalities default to `max + 1` per variable (at least 2) unless given.
    pub fn read_csv<R: Read>(reader: R, cardinalities: Option<Vec<usize>>) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers().map_err(csv_err)?.clone();
        if header.len() < 3 || &header[0] != "env" || &header[1] != "pos" {
            return Err(Error::parse(1, "expected header `env,pos,x0,...`"));
        }
        let d = header.len() - 2;
        let mut rows: Vec<(usize, usize, Vec<u32>)> = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let nums = rec
                .iter()
                .map(|f| f.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(i + 2, e.to_string()))?;
            if nums.len() != d + 2 {
                return Err(Error::parse(i + 2, "wrong number of fields"));
            }
            rows.push((nums[0], nums[1], nums[2..].iter().map(|&v| v as u32).collect()));
        }
        let num_envs = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let num_positions = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
        if rows.len() != num_envs * num_positions {
            return Err(Error::invalid(format!(
                "{} rows do not form a complete {num_envs} x {num_positions} grid",
                rows.len()
            )));
        }
        let mut values = vec![u32::MAX; num_envs * num_positions * d];
        for (env, pos, vals) in rows {
            let start = (env * num_positions + pos) * d;
            if values[start] != u32::MAX {
                return Err(Error::invalid(format!("duplicate row env={env} pos={pos}")));
            }
            values[start..start + d].copy_from_slice(&vals);
        }
        let cardinalities = cardinalities.unwrap_or_else(|| {
            (0..d)
                .map(|v| {
                    values
                        .iter()
                        .skip(v)
                        .step_by(d)
                        .map(|&x| x as usize + 1)
                        .max()
                        .unwrap_or(2)
                        .max(2)
                })
                .collect()
        });
        ExchangeableDataset::new(num_envs, num_positions, cardinalities, values)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::parse(e.position().map_or(0, |p| p.line() as usize), e.to_string())
}
