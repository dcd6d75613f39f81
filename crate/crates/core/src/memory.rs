//! Append-only episodic memory with exact k-nearest-neighbour lookup per
//! outcome space.
//!
//! Every episode is indexed in every space where it reached an outcome, not
//! only in the space of its goal (hindsight indexing).

use crate::error::{Error, Result};
use crate::types::{euclidean, Episode, SpaceId, TaskHierarchy};

/// A neighbour returned by [`Memory::knn`]: episode position and distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub episode: usize,
    pub distance: f64,
}

/// Points of one outcome space, stored contiguously in insertion order.
#[derive(Debug, Clone, Default)]
struct SpaceIndex {
    dim: usize,
    points: Vec<f64>,
    episodes: Vec<usize>,
}

impl SpaceIndex {
    fn len(&self) -> usize {
        self.episodes.len()
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Debug, Clone)]
pub struct Memory {
    episodes: Vec<Episode>,
    index: Vec<SpaceIndex>,
    action_dim: usize,
}

impl Memory {
    pub fn new(hierarchy: &TaskHierarchy) -> Self {
        let index = hierarchy
            .space_ids()
            .map(|s| SpaceIndex {
                dim: hierarchy.dim(s).expect("space from hierarchy"),
                ..Default::default()
            })
            .collect();
        Self {
            episodes: Vec::new(),
            index,
            action_dim: hierarchy.action_dim(),
        }
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn episodes(&self) -> &[Episode] {
        &self.episodes
    }

    pub fn episode(&self, i: usize) -> &Episode {
        &self.episodes[i]
    }

    /// Number of stored outcomes in `space`.
    pub fn count(&self, space: SpaceId) -> Result<usize> {
        Ok(self.space_index(space)?.len())
    }

    fn space_index(&self, space: SpaceId) -> Result<&SpaceIndex> {
        self.index.get(space.0).ok_or(Error::UnknownSpace(space))
    }

    fn validate(&self, ep: &Episode) -> Result<()> {
        if ep.reached.len() != self.index.len() {
            return Err(Error::DimensionMismatch {
                expected: self.index.len(),
                got: ep.reached.len(),
            });
        }
        check_unit(self.space_index(ep.goal.space)?.dim, &ep.goal.values, "goal")?;
        for (s, reached) in ep.reached.iter().enumerate() {
            if let Some(o) = reached {
                if o.space.0 != s {
                    return Err(Error::UnknownSpace(o.space));
                }
                check_unit(self.index[s].dim, &o.values, "reached outcome")?;
            }
        }
        for a in &ep.compound.actions {
            if a.dim() != self.action_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.action_dim,
                    got: a.dim(),
                });
            }
            for &v in &a.params {
                if !v.is_finite() || !(-1.0..=1.0).contains(&v) {
                    return Err(Error::OutOfBounds {
                        what: "executed action",
                        value: v,
                    });
                }
            }
        }
        if ep.reached_in(ep.goal.space).is_none() {
            let floor = -(ep.goal.dim() as f64).sqrt();
            if ep.competence_goal != floor {
                return Err(Error::OutOfBounds {
                    what: "competence of unreached goal",
                    value: ep.competence_goal,
                });
            }
        }
        Ok(())
    }

    /// Appends an episode and indexes every reached outcome. Returns the
    /// episode's position.
    pub fn record(&mut self, episode: Episode) -> Result<usize> {
        self.validate(&episode)?;
        let pos = self.episodes.len();
        for (s, reached) in episode.reached.iter().enumerate() {
            if let Some(o) = reached {
                let idx = &mut self.index[s];
                idx.points.extend_from_slice(&o.values);
                idx.episodes.push(pos);
            }
        }
        self.episodes.push(episode);
        Ok(pos)
    }

    /// Exact k nearest stored outcomes of `space`, ascending by distance; ties
    /// go to the earlier episode.
    pub fn knn(&self, space: SpaceId, query: &[f64], k: usize) -> Result<Vec<Neighbor>> {
        if k == 0 {
            return Err(Error::InvalidK);
        }
        let idx = self.space_index(space)?;
        if query.len() != idx.dim {
            return Err(Error::DimensionMismatch {
                expected: idx.dim,
                got: query.len(),
            });
        }
        let mut best: Vec<Neighbor> = Vec::with_capacity(k + 1);
        for i in 0..idx.len() {
            let d = euclidean(idx.point(i), query);
            if best.len() == k && d >= best[k - 1].distance {
                continue;
            }
            // strict comparison keeps earlier episodes ahead on ties
            let at = best.partition_point(|n| n.distance <= d);
            best.insert(
                at,
                Neighbor {
                    episode: idx.episodes[i],
                    distance: d,
                },
            );
            best.truncate(k);
        }
        Ok(best)
    }

    /// Number of stored outcomes of `space` within `radius` of `query`.
    pub fn count_within(&self, space: SpaceId, query: &[f64], radius: f64) -> Result<usize> {
        let idx = self.space_index(space)?;
        if query.len() != idx.dim {
            return Err(Error::DimensionMismatch {
                expected: idx.dim,
                got: query.len(),
            });
        }
        Ok((0..idx.len())
            .filter(|&i| euclidean(idx.point(i), query) <= radius)
            .count())
    }

    /// Episode positions indexed in `space`, in insertion order.
    pub fn indexed(&self, space: SpaceId) -> Result<&[usize]> {
        Ok(&self.space_index(space)?.episodes)
    }
}

fn check_unit(dim: usize, values: &[f64], what: &'static str) -> Result<()> {
    if values.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: values.len(),
        });
    }
    const TOL: f64 = 1e-9;
    for &v in values {
        if !v.is_finite() || v < -TOL || v > 1.0 + TOL {
            return Err(Error::OutOfBounds { what, value: v });
        }
    }
    Ok(())
}
