//! Stopping-time construction of sparse families and the pointwise
//! comparison of `T(fχ_{κQ₀})` with the sparse operator
//! `Σ_{Q∈S} ⟨fχ_{κ²Q₀}⟩_{κ²Q,p} χ_Q`.
//!
//! All measures are exact cell counts on the sampling lattice. Witness sets
//! of the dyadic family are "cube minus selected children"; after
//! enlargement to γ-cubes they are re-selected explicitly on a half-cell
//! lattice so that disjointness can be audited directly.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::cells::{CellSet, CubeCells};
use crate::error::{Error, Result};
use crate::grid::{Cube, DyadicGammaCube, GammaCube, GridConfig};
use crate::lattice::LatticeFunction;
use crate::operators::VariationOperator;
use crate::tail::{localized_transform, tail_maximal_field, TailMaximalConfig};

/// `1/2^{d+1}`.
pub fn default_height(d: usize) -> f64 {
    1.0 / (1u64 << (d + 1)) as f64
}

/// `1/(2·4^{d-1})`.
pub fn enlarged_eta(d: usize) -> f64 {
    1.0 / (2.0 * 4f64.powi(d as i32 - 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CZResult {
    pub selected: Vec<DyadicGammaCube>,
    /// Selected at the finest resolvable generation because the cube meets `E`
    /// although its density does not exceed the height.
    pub terminal: Vec<bool>,
    /// Measure of `E` left uncovered; zero whenever the descent reaches the
    /// lattice resolution.
    pub residual_measure: f64,
    pub selected_measure: f64,
    /// Cells claimed by more than one selected cube.
    pub overlapping_cells: u64,
    /// Largest density among the parents of selected cubes, `Q₀` included.
    pub max_parent_density: f64,
}

/// Top-down stopping time on the dyadic subcubes of `Q₀`.
pub fn cz_decompose(e: &CellSet, cells: &CubeCells, height: f64) -> Result<CZResult> {
    if !(height > 0.0 && height < 1.0) {
        return Err(Error::Config(format!(
            "height must lie in (0, 1), got {height}"
        )));
    }
    let grid = cells.grid();
    let cell_vol: f64 = cells.cell_size().iter().product();
    let mut selected = Vec::new();
    let mut terminal = Vec::new();
    let mut covered = CellSet::empty(cells);
    let mut max_parent = 0.0f64;
    let mut overlaps = 0u64;
    let mut stack = vec![cells.q0().clone()];
    while let Some(q) = stack.pop() {
        if !cells.has_children(&q) {
            continue;
        }
        let parent_density = e.count_in(cells, &q)? as f64 / cells.count(&q)? as f64;
        let mut descend = Vec::new();
        for p in grid.children(&q)? {
            let hits = e.count_in(cells, &p)?;
            if hits == 0 {
                continue;
            }
            let density = hits as f64 / cells.count(&p)? as f64;
            let stop = density > height;
            if stop || !cells.has_children(&p) {
                max_parent = max_parent.max(parent_density);
                for c in cells.cells(&p)? {
                    if covered.contains(c) {
                        overlaps += 1;
                    }
                    covered.insert(c);
                }
                selected.push(p);
                terminal.push(!stop);
            } else {
                descend.push(p);
            }
        }
        // Reverse so the stack yields children in grid order.
        stack.extend(descend.into_iter().rev());
    }
    let residual = e.iter().filter(|&c| !covered.contains(c)).count();
    let sel_cells: usize = selected
        .iter()
        .map(|p| cells.count(p))
        .sum::<Result<usize>>()?;
    Ok(CZResult {
        selected,
        terminal,
        residual_measure: residual as f64 * cell_vol,
        selected_measure: sel_cells as f64 * cell_vol,
        overlapping_cells: overlaps,
        max_parent_density: max_parent,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExceptionalSet {
    pub e: CellSet,
    pub c: f64,
    /// `⟨f⟩_{κ²Q₀,p}`.
    pub average: f64,
    /// `(C, |E| in cells)` for every ladder value tried.
    pub trace: Vec<(f64, u64)>,
    /// `M_{T,Q₀} f` on the cells of `Q₀`.
    pub tail: Vec<f64>,
}

/// `E = {f > C⟨f⟩_{κ²Q₀,p}} ∪ {M_{T,Q₀} f > C⟨f⟩_{κ²Q₀,p}}` for the smallest
/// `C = 2^m`, `0 ≤ m ≤ ladder_max`, with `|E| ≤ |Q₀|/2^{d+2}`.
pub fn exceptional_set(
    f: &LatticeFunction,
    cells: &CubeCells,
    tail_cfg: &TailMaximalConfig,
    op: &VariationOperator,
    p: f64,
    ladder_max: u32,
) -> Result<ExceptionalSet> {
    let grid = cells.grid();
    let k2q0 = grid
        .cube(cells.q0())
        .dilate(tail_cfg.kappa * tail_cfg.kappa)?;
    let average = f.average(&k2q0, p)?;
    if average == 0.0 {
        return Ok(ExceptionalSet {
            e: CellSet::empty(cells),
            c: 1.0,
            average,
            trace: vec![(1.0, 0)],
            tail: vec![0.0; cells.len()],
        });
    }
    let tail = tail_maximal_field(f, cells, tail_cfg, op)?;
    let values: Vec<f64> = (0..cells.len())
        .map(|c| f.evaluate(&cells.center(c)))
        .collect();
    let budget = cells.len() as u64;
    let shift = cells.dim() as u32 + 2;
    let mut trace = Vec::new();
    for m in 0..=ladder_max {
        let c = (m as f64).exp2();
        let level = c * average;
        let bits: Vec<bool> = (0..cells.len())
            .map(|i| values[i] > level || tail[i] > level)
            .collect();
        let count = bits.iter().filter(|b| **b).count() as u64;
        trace.push((c, count));
        if count << shift <= budget {
            return Ok(ExceptionalSet {
                e: CellSet::from_bits(cells, bits)?,
                c,
                average,
                trace,
                tail,
            });
        }
    }
    Err(Error::ConstructionFailure {
        reason: format!("no C up to 2^{ladder_max} makes |E| <= |Q0|/2^{shift}"),
        trace,
    })
}

/// Identifies the cube a family member stands for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CubeRef {
    Dyadic(DyadicGammaCube),
    Gamma(GammaCube),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// The cube minus the listed members.
    CubeMinus(Vec<usize>),
    /// Explicit cells of the family's witness lattice.
    Cells(Vec<Vec<i64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub cube: CubeRef,
    #[serde(skip)]
    pub geometry: Option<Cube>,
    pub depth: usize,
    pub witness_measure: f64,
    #[serde(skip)]
    pub witness: Option<Witness>,
}

impl FamilyMember {
    pub fn geometry(&self) -> &Cube {
        self.geometry
            .as_ref()
            .expect("geometry is set on construction")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseFamily {
    pub members: Vec<FamilyMember>,
    /// Target sparsity of the construction.
    pub eta: f64,
    /// Cell size of the lattice on which witnesses are measured.
    pub witness_cell: Vec<f64>,
}

impl SparseFamily {
    fn new(eta: f64, witness_cell: Vec<f64>) -> Self {
        SparseFamily {
            members: Vec::new(),
            eta,
            witness_cell,
        }
    }

    /// A family from explicit cubes, each witnessed by the whole cube.
    pub fn from_cubes(cubes: Vec<Cube>, eta: f64, witness_cell: Vec<f64>) -> Self {
        let members = cubes
            .into_iter()
            .map(|c| FamilyMember {
                cube: CubeRef::Gamma(GammaCube {
                    center: c.center.clone(),
                    l: 0.0,
                    sides: c.sides.clone(),
                }),
                witness_measure: c.volume(),
                geometry: Some(c),
                depth: 0,
                witness: Some(Witness::CubeMinus(Vec::new())),
            })
            .collect();
        SparseFamily {
            members,
            eta,
            witness_cell,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dyadic_cubes(&self) -> Vec<DyadicGammaCube> {
        self.members
            .iter()
            .filter_map(|m| match &m.cube {
                CubeRef::Dyadic(q) => Some(q.clone()),
                CubeRef::Gamma(_) => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeStatus {
    Expanded,
    DepthLimit,
    ResolutionLimit,
}

/// Audit record of one node of the recursion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeAudit {
    pub cube: DyadicGammaCube,
    pub depth: usize,
    pub status: NodeStatus,
    pub c: Option<f64>,
    pub exceptional_cells: u64,
    pub cube_cells: u64,
    pub selected_cells: u64,
    pub terminal_selections: usize,
    pub residual_measure: f64,
    pub overlapping_cells: u64,
    pub max_parent_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseConfig {
    pub p: f64,
    /// Stopping-time height; defaults to `1/2^{d+1}`.
    pub height: Option<f64>,
    pub max_depth: usize,
    pub ladder_max: u32,
    /// Stride of the esssup over `ξ ∈ Q` in the tail maximal operator.
    pub esssup_stride: usize,
    /// Sparsity certified after enlargement; defaults to `1/(2·4^{d-1})`.
    pub eta_target: Option<f64>,
    /// `LHS` above this with vanishing `RHS` is flagged.
    pub flag_tol: f64,
}

impl Default for SparseConfig {
    fn default() -> Self {
        SparseConfig {
            p: 2.0,
            height: None,
            max_depth: 4,
            ladder_max: 30,
            esssup_stride: 1,
            eta_target: None,
            flag_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseBuild {
    pub family: SparseFamily,
    pub nodes: Vec<NodeAudit>,
}

/// Iterated stopping time starting at `Q₀`: each selected cube is re-entered
/// as its own root until `max_depth` or the lattice resolution is reached.
pub fn build_sparse_family(
    f: &LatticeFunction,
    grid: &GridConfig,
    q0: &DyadicGammaCube,
    op: &VariationOperator,
    cfg: &SparseConfig,
) -> Result<SparseBuild> {
    let h: Vec<f64> = (0..grid.dim()).map(|i| f.sample_box().cell(i)).collect();
    let d = grid.dim();
    let height = cfg.height.unwrap_or_else(|| default_height(d));
    let kappa = grid.kappa()?;
    let mut family = SparseFamily::new(0.5, h.clone());
    let mut nodes = Vec::new();
    let mut queue = std::collections::VecDeque::from([(q0.clone(), 0usize, None::<usize>)]);
    let mut children: Vec<Vec<usize>> = Vec::new();
    while let Some((q, depth, parent)) = queue.pop_front() {
        let cells = CubeCells::new(grid, &q, &h)?;
        let me = family.members.len();
        children.push(Vec::new());
        if let Some(pi) = parent {
            children[pi].push(me);
        }
        family.members.push(FamilyMember {
            cube: CubeRef::Dyadic(q.clone()),
            geometry: Some(grid.cube(&q)),
            depth,
            witness_measure: 0.0,
            witness: None,
        });
        let mut audit = NodeAudit {
            cube: q.clone(),
            depth,
            status: NodeStatus::Expanded,
            c: None,
            exceptional_cells: 0,
            cube_cells: cells.len() as u64,
            selected_cells: 0,
            terminal_selections: 0,
            residual_measure: 0.0,
            overlapping_cells: 0,
            max_parent_density: 0.0,
        };
        if depth >= cfg.max_depth {
            audit.status = NodeStatus::DepthLimit;
        } else if !cells.has_children(&q) {
            audit.status = NodeStatus::ResolutionLimit;
        } else {
            let tail_cfg = TailMaximalConfig {
                q0: q.clone(),
                kappa,
                generations: (cells.k_fine(), q.k - 1),
                stride: cfg.esssup_stride,
            };
            let ex = exceptional_set(f, &cells, &tail_cfg, op, cfg.p, cfg.ladder_max)?;
            let cz = cz_decompose(&ex.e, &cells, height)?;
            audit.c = Some(ex.c);
            audit.exceptional_cells = ex.e.len() as u64;
            audit.terminal_selections = cz.terminal.iter().filter(|t| **t).count();
            audit.residual_measure = cz.residual_measure;
            audit.overlapping_cells = cz.overlapping_cells;
            audit.max_parent_density = cz.max_parent_density;
            audit.selected_cells = cz
                .selected
                .iter()
                .map(|p| cells.count(p))
                .sum::<Result<usize>>()? as u64;
            for p in cz.selected {
                queue.push_back((p, depth + 1, Some(me)));
            }
        }
        nodes.push(audit);
    }
    for (i, kids) in children.into_iter().enumerate() {
        let taken: f64 = kids
            .iter()
            .map(|&k| family.members[k].geometry().volume())
            .sum();
        let m = &mut family.members[i];
        m.witness_measure = m.geometry().volume() - taken;
        m.witness = Some(Witness::CubeMinus(kids));
    }
    Ok(SparseBuild { family, nodes })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finalized {
    pub family: SparseFamily,
    /// `min |E_Q| / |Q̃|` with the dyadic witnesses kept.
    pub inherited_eta: f64,
    /// `min |E_Q̃| / |Q̃|` after re-selection.
    pub certified_eta: f64,
}

/// Replaces every cube by its enlargement `Q̃` and re-selects witnesses:
/// smallest cubes first, each claims the free half-cells of `Q̃` nearest to
/// its center in the gauge until it holds `⌈η |Q̃|⌉` of them.
pub fn finalize_family(
    family: &SparseFamily,
    grid: &GridConfig,
    eta_target: Option<f64>,
) -> Result<Finalized> {
    let d = grid.dim();
    let eta = eta_target.unwrap_or_else(|| enlarged_eta(d));
    let cell: Vec<f64> = family.witness_cell.iter().map(|h| h / 2.0).collect();
    let mut out = SparseFamily::new(eta, cell.clone());
    if family.is_empty() {
        return Ok(Finalized {
            family: out,
            inherited_eta: 1.0,
            certified_eta: 1.0,
        });
    }
    let mut big = Vec::with_capacity(family.len());
    let mut inherited = f64::INFINITY;
    for m in &family.members {
        let q = match &m.cube {
            CubeRef::Dyadic(q) => q,
            CubeRef::Gamma(_) => return Err(Error::Domain("family is already enlarged".into())),
        };
        let g = grid.enlarge_to_gamma_cube(q);
        inherited = inherited.min(m.witness_measure / g.as_cube().volume());
        big.push(g);
    }
    let mut order: Vec<usize> = (0..big.len()).collect();
    order.sort_by(|&a, &b| {
        big[a]
            .as_cube()
            .volume()
            .partial_cmp(&big[b].as_cube().volume())
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut claimed: HashSet<Vec<i64>> = HashSet::new();
    let mut witnesses: Vec<Vec<Vec<i64>>> = vec![Vec::new(); big.len()];
    let cell_vol: f64 = cell.iter().product();
    let mut certified = f64::INFINITY;
    for &i in &order {
        let cube = big[i].as_cube();
        let ranges = cell_ranges(&cube, &cell)?;
        let total: usize = ranges.iter().map(|(a, b)| (b - a) as usize).product();
        let need = (eta * total as f64).ceil() as usize;
        let mut cand: Vec<(f64, Vec<i64>)> = Vec::with_capacity(total);
        let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        'walk: loop {
            if !claimed.contains(&idx) {
                let off: Vec<f64> = (0..d)
                    .map(|a| (idx[a] as f64 + 0.5) * cell[a] - cube.center[a])
                    .collect();
                cand.push((grid.curve.gauge(&off), idx.clone()));
            }
            let mut axis = d;
            loop {
                if axis == 0 {
                    break 'walk;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < ranges[axis].1 {
                    break;
                }
                idx[axis] = ranges[axis].0;
            }
        }
        cand.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1)));
        cand.truncate(need);
        for (_, c) in &cand {
            claimed.insert(c.clone());
        }
        certified = certified.min(cand.len() as f64 / total as f64);
        witnesses[i] = cand.into_iter().map(|(_, c)| c).collect();
    }
    for (i, (m, g)) in family.members.iter().zip(big).enumerate() {
        let w = std::mem::take(&mut witnesses[i]);
        out.members.push(FamilyMember {
            witness_measure: w.len() as f64 * cell_vol,
            geometry: Some(g.as_cube()),
            cube: CubeRef::Gamma(g),
            depth: m.depth,
            witness: Some(Witness::Cells(w)),
        });
    }
    Ok(Finalized {
        family: out,
        inherited_eta: inherited,
        certified_eta: certified,
    })
}

/// Integer cell ranges `[a, b)` of a cube on the lattice `cell·Z^d`.
fn cell_ranges(cube: &Cube, cell: &[f64]) -> Result<Vec<(i64, i64)>> {
    (0..cube.dim())
        .map(|i| {
            let a = cube.lo(i) / cell[i];
            let b = cube.hi(i) / cell[i];
            if a.fract() != 0.0 || b.fract() != 0.0 {
                return Err(Error::Domain(format!(
                    "cube is not aligned with the witness lattice on axis {i}"
                )));
            }
            Ok((a as i64, b as i64))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityReport {
    pub holds: bool,
    pub eta: f64,
    pub disjoint: bool,
    pub overlapping_cells: u64,
    /// `min |E_Q| / |Q|`.
    pub worst_ratio: f64,
    pub worst_member: Option<usize>,
}

/// Audits disjointness of the witnesses and `|E_Q| ≥ η|Q|` on the family's
/// witness lattice.
pub fn verify_sparsity(family: &SparseFamily, eta: f64) -> Result<SparsityReport> {
    let cell = &family.witness_cell;
    let cell_vol: f64 = cell.iter().product();
    let mut owner: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut overlaps = 0u64;
    let mut worst = (f64::INFINITY, None);
    for (i, m) in family.members.iter().enumerate() {
        let cube = m.geometry();
        let cells: Vec<Vec<i64>> = match m.witness.as_ref() {
            Some(Witness::Cells(c)) => c.clone(),
            Some(Witness::CubeMinus(kids)) => {
                let removed: Vec<Vec<(i64, i64)>> = kids
                    .iter()
                    .map(|&k| cell_ranges(family.members[k].geometry(), cell))
                    .collect::<Result<_>>()?;
                let r = cell_ranges(cube, cell)?;
                let mut out = Vec::new();
                let mut idx: Vec<i64> = r.iter().map(|x| x.0).collect();
                'walk: loop {
                    let gone = removed
                        .iter()
                        .any(|rr| rr.iter().zip(&idx).all(|((a, b), v)| a <= v && v < b));
                    if !gone {
                        out.push(idx.clone());
                    }
                    let mut axis = idx.len();
                    loop {
                        if axis == 0 {
                            break 'walk;
                        }
                        axis -= 1;
                        idx[axis] += 1;
                        if idx[axis] < r[axis].1 {
                            break;
                        }
                        idx[axis] = r[axis].0;
                    }
                }
                out
            }
            None => Vec::new(),
        };
        let inside = cell_ranges(cube, cell)?;
        let mut own = 0usize;
        for c in cells {
            if !inside.iter().zip(&c).all(|((a, b), v)| a <= v && v < b) {
                continue;
            }
            own += 1;
            if owner.insert(c, i).is_some() {
                overlaps += 1;
            }
        }
        let ratio = own as f64 * cell_vol / cube.volume();
        if ratio < worst.0 {
            worst = (ratio, Some(i));
        }
    }
    let worst_ratio = if family.is_empty() { 1.0 } else { worst.0 };
    Ok(SparsityReport {
        holds: overlaps == 0 && worst_ratio >= eta,
        eta,
        disjoint: overlaps == 0,
        overlapping_cells: overlaps,
        worst_ratio,
        worst_member: worst.1,
    })
}

/// `x ↦ Σ_{Q∈S} ⟨fχ_{κ²Q₀}⟩_{κ²Q,p} χ_Q(x)` with every average cached.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    cubes: Vec<Cube>,
    averages: Vec<f64>,
}

impl SparseOperator {
    pub fn new(
        family: &SparseFamily,
        f: &LatticeFunction,
        q0: &Cube,
        kappa: f64,
        p: f64,
    ) -> Result<Self> {
        let k2 = kappa * kappa;
        let g = f.masked(&q0.dilate(k2)?, None);
        let cubes: Vec<Cube> = family
            .members
            .iter()
            .map(|m| m.geometry().clone())
            .collect();
        let averages = cubes
            .iter()
            .map(|c| g.average(&c.dilate(k2)?, p))
            .collect::<Result<_>>()?;
        Ok(SparseOperator { cubes, averages })
    }

    pub fn averages(&self) -> &[f64] {
        &self.averages
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.cubes
            .iter()
            .zip(&self.averages)
            .filter(|(c, _)| c.contains(x))
            .map(|(_, a)| a)
            .sum()
    }
}

/// One-shot evaluation of the sparse operator.
pub fn sparse_operator(
    family: &SparseFamily,
    f: &LatticeFunction,
    x: &[f64],
    p: f64,
    kappa: f64,
    q0: &Cube,
) -> Result<f64> {
    Ok(SparseOperator::new(family, f, q0, kappa, p)?.evaluate(x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyStats {
    pub members: usize,
    pub per_depth: Vec<usize>,
    pub nodes: Vec<NodeAudit>,
    pub half_sparse: SparsityReport,
    pub finalized_sparse: SparsityReport,
    pub inherited_eta: f64,
    pub certified_eta: f64,
    pub eta_target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationRow {
    pub x: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub p: f64,
    /// `sup LHS/RHS` with the enlarged family and `⟨·⟩_{κ²Q,p}`.
    pub fitted_constant: f64,
    /// The same with plain averages.
    pub fitted_constant_p1: f64,
    /// The dyadic family before enlargement, `⟨·⟩_{κ²Q,p}`.
    pub fitted_constant_dyadic: f64,
    pub coverage_flags: Vec<Vec<f64>>,
    pub points: usize,
    pub max_lhs: f64,
    pub selected: Vec<DyadicGammaCube>,
    pub family_stats: FamilyStats,
    #[serde(skip)]
    pub rows: Vec<DominationRow>,
}

/// Runs the full construction on `Q₀` and compares both sides at every cell
/// center of `Q₀`.
pub fn verify_domination(
    f: &LatticeFunction,
    grid: &GridConfig,
    q0: &DyadicGammaCube,
    op: &VariationOperator,
    cfg: &SparseConfig,
) -> Result<DominationReport> {
    let d = grid.dim();
    let kappa = grid.kappa()?;
    let h: Vec<f64> = (0..d).map(|i| f.sample_box().cell(i)).collect();
    let cells = CubeCells::new(grid, q0, &h)?;
    let build = build_sparse_family(f, grid, q0, op, cfg)?;
    let fin = finalize_family(&build.family, grid, cfg.eta_target)?;
    let q0c = grid.cube(q0);
    let main = SparseOperator::new(&fin.family, f, &q0c, kappa, cfg.p)?;
    let plain = SparseOperator::new(&fin.family, f, &q0c, kappa, 1.0)?;
    let dyadic = SparseOperator::new(&build.family, f, &q0c, kappa, cfg.p)?;
    let lhs = localized_transform(f, &cells, kappa, op)?;
    let mut rows = Vec::with_capacity(cells.len());
    let (mut c_main, mut c_plain, mut c_dyadic, mut max_lhs) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut flags = Vec::new();
    for (c, &l) in lhs.iter().enumerate() {
        let x = cells.center(c);
        let r = main.evaluate(&x);
        let r1 = plain.evaluate(&x);
        let rd = dyadic.evaluate(&x);
        max_lhs = max_lhs.max(l);
        if r > 0.0 {
            c_main = c_main.max(l / r);
        } else if l > cfg.flag_tol {
            flags.push(x.clone());
        }
        if r1 > 0.0 {
            c_plain = c_plain.max(l / r1);
        }
        if rd > 0.0 {
            c_dyadic = c_dyadic.max(l / rd);
        }
        rows.push(DominationRow {
            ratio: (r > 0.0).then(|| l / r),
            x,
            lhs: l,
            rhs: r,
        });
    }
    let mut per_depth = Vec::new();
    for m in &build.family.members {
        if per_depth.len() <= m.depth {
            per_depth.resize(m.depth + 1, 0);
        }
        per_depth[m.depth] += 1;
    }
    let half = verify_sparsity(&build.family, 0.5)?;
    let finalized = verify_sparsity(&fin.family, fin.family.eta)?;
    Ok(DominationReport {
        p: cfg.p,
        fitted_constant: c_main,
        fitted_constant_p1: c_plain,
        fitted_constant_dyadic: c_dyadic,
        coverage_flags: flags,
        points: cells.len(),
        max_lhs,
        selected: build.family.dyadic_cubes(),
        family_stats: FamilyStats {
            members: build.family.len(),
            per_depth,
            nodes: build.nodes,
            half_sparse: half,
            finalized_sparse: finalized,
            inherited_eta: fin.inherited_eta,
            certified_eta: fin.certified_eta,
            eta_target: fin.family.eta,
        },
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::MonomialCurve;
    use crate::grid::ShiftConvention;

    fn setup() -> (GridConfig, CubeCells) {
        let grid = GridConfig::new(
            MonomialCurve::standard(2).unwrap(),
            -6,
            2,
            ShiftConvention::AlternatingThird,
        )
        .unwrap();
        let q0 = DyadicGammaCube::new(0, vec![0, 0], vec![0, 0]).unwrap();
        let cells = CubeCells::new(&grid, &q0, &[1.0 / 64.0, 1.0 / 64.0]).unwrap();
        (grid, cells)
    }

    #[test]
    fn cz_examples() {
        let (grid, cells) = setup();
        let h = default_height(2);
        assert_eq!(h, 0.125);
        let empty = cz_decompose(&CellSet::empty(&cells), &cells, h).unwrap();
        assert!(empty.selected.is_empty());
        assert_eq!(empty.residual_measure, 0.0);
        let child = grid.children(cells.q0()).unwrap()[3].clone();
        let one = cz_decompose(&CellSet::of_cube(&cells, &child).unwrap(), &cells, h).unwrap();
        assert_eq!(one.selected, vec![child]);
        assert_eq!(one.max_parent_density, 0.125);
        let all = cz_decompose(&CellSet::full(&cells), &cells, h).unwrap();
        assert_eq!(all.selected, grid.children(cells.q0()).unwrap());
        assert!(cz_decompose(&CellSet::full(&cells), &cells, 1.0).is_err());
    }

    #[test]
    fn cz_selects_at_resolution() {
        let (_, cells) = setup();
        let e = CellSet::from_points(&cells, &[vec![0.3, 0.3], vec![0.8, 0.1]]).unwrap();
        let r = cz_decompose(&e, &cells, 0.125).unwrap();
        assert_eq!(r.selected.len(), 2);
        assert!(r.terminal.iter().all(|t| *t));
        assert_eq!(r.residual_measure, 0.0);
        assert_eq!(r.selected_measure, 16.0 / 4096.0);
    }

    #[test]
    fn enlargement_of_single_cube() {
        let (grid, cells) = setup();
        let fam = SparseFamily {
            members: vec![FamilyMember {
                cube: CubeRef::Dyadic(cells.q0().clone()),
                geometry: Some(grid.cube(cells.q0())),
                depth: 0,
                witness_measure: 1.0,
                witness: Some(Witness::CubeMinus(vec![])),
            }],
            eta: 0.5,
            witness_cell: vec![1.0 / 64.0; 2],
        };
        assert!(verify_sparsity(&fam, 0.5).unwrap().holds);
        let fin = finalize_family(&fam, &grid, None).unwrap();
        let m = &fin.family.members[0];
        assert_eq!(m.geometry().sides, vec![4.0, 16.0]);
        assert_eq!(fin.inherited_eta, 1.0 / 64.0);
        assert!(fin.certified_eta >= 0.125);
        assert!(verify_sparsity(&fin.family, 0.125).unwrap().holds);
        let empty =
            finalize_family(&SparseFamily::new(0.5, vec![1.0 / 64.0; 2]), &grid, None).unwrap();
        assert!(empty.family.is_empty());
    }

    #[test]
    fn duplicate_cubes_are_not_sparse() {
        let c = Cube::from_bounds(&[0.0, 0.0], &[1.0, 1.0]);
        let fam = SparseFamily::from_cubes(vec![c.clone(), c], 0.5, vec![1.0 / 8.0; 2]);
        let r = verify_sparsity(&fam, 0.5).unwrap();
        assert!(!r.holds);
        assert!(!r.disjoint);
    }
}
