//! Pipeline configuration, argument parsing, and the end-to-end run that the
//! `spafac` binary drives: ingest, preprocess, fit or tune, evaluate, and
//! serialize. All file writes happen after the computation completes.

use std::path::{Path, PathBuf};

use crate::bundle::{
    write_contributions_csv, write_scores_csv, write_text, write_tuning_csv, ResultBundle,
    SparsitySummary, SupplementaryBlock,
};
use crate::ca::{
    check_properties, fit_prepared, preprocess_ca, preprocess_dimca, preprocess_disca,
    preprocess_mca, CaMethod, CaModel, Decomposition, FitOptions, GroupDesign, Prepared,
    SparsitySpec,
};
use crate::error::{Error, Result};
use crate::evaluation::{bootstrap_group_means, classify_nearest_group, BootstrapSpec};
use crate::ingest::{ingest_categorical, ingest_contingency};
use crate::matrix::{DiagonalMetric, Matrix};
use crate::projectors::PocsPriority;
use crate::sparse::SparseGsvdResult;
use crate::svg::{factor_map_svg, scree_svg, sparsity_map_svg};
use crate::tuning::{
    fit_best, grid_search, sparsity_indices, GridSpec, IndexSelector, ZoneThresholds,
};

pub const USAGE: &str = "\
usage: spafac <ca|mca|disca|dimca> --input FILE --out DIR [options]

options:
  --groups COL          header name of the group column (required for disca/dimca)
  --sparsity-rows F     row radius as a fraction of sqrt(rows), in (0, 1]
  --sparsity-cols F     column radius as a fraction of sqrt(cols), in (0, 1]
  --rank N              number of dimensions (default: min(rows, cols) - 1)
  --tune                grid-search radii and rank instead of fixing them
  --min-rank N          smallest rank the tuning grid considers (default 2)
  --epsilon E           convergence tolerance (default 1e-9)
  --max-iter N          iteration budget per dimension (default 1000)
  --seed S              random seed for the bootstrap (default 0)
  --priority P          sparsity-last | orthogonality-last (default sparsity-last)
  --drop-empty          drop all-zero rows/columns instead of rejecting them
  --svg                 also emit scree.svg, sparsity_map.svg, factor_map_1_2.svg
  --out DIR             output directory (required)

exit codes: 0 ok, 1 io, 2 parse, 3 validation, 4 non-convergence, 5 infeasible
";

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub method: CaMethod,
    pub input: PathBuf,
    pub out: PathBuf,
    pub groups: Option<String>,
    pub sparsity_rows: Option<f64>,
    pub sparsity_cols: Option<f64>,
    pub rank: Option<usize>,
    pub tune: bool,
    pub min_rank: usize,
    pub epsilon: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub priority: PocsPriority,
    pub drop_empty: bool,
    pub svg: bool,
}

/// Parses the CLI surface. `args` excludes the program name.
pub fn parse_args<I>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = String>,
{
    let mut args = args.into_iter().peekable();
    let method: CaMethod = args
        .next()
        .ok_or_else(|| Error::InvalidConfig("missing method; see --help".into()))?
        .parse()?;
    let mut input: Option<PathBuf> = None;
    let mut out: Option<PathBuf> = None;
    let mut groups = None;
    let mut sparsity_rows = None;
    let mut sparsity_cols = None;
    let mut rank = None;
    let mut tune = false;
    let mut min_rank = 2usize;
    let mut epsilon = crate::als::DEFAULT_EPSILON;
    let mut max_iter = crate::als::DEFAULT_MAX_ITER;
    let mut seed = 0u64;
    let mut priority = PocsPriority::SparsityLast;
    let mut drop_empty = false;
    let mut svg = false;

    fn value<I: Iterator<Item = String>>(args: &mut I, flag: &str) -> Result<String> {
        args.next()
            .ok_or_else(|| Error::InvalidConfig(format!("{flag} needs a value")))
    }
    fn parse<T: std::str::FromStr>(raw: &str, flag: &str) -> Result<T> {
        raw.parse()
            .map_err(|_| Error::InvalidConfig(format!("{flag}: cannot parse {raw:?}")))
    }

    while let Some(flag) = args.next() {
        match flag.as_str() {
            "--input" => input = Some(PathBuf::from(value(&mut args, "--input")?)),
            "--out" => out = Some(PathBuf::from(value(&mut args, "--out")?)),
            "--groups" => groups = Some(value(&mut args, "--groups")?),
            "--sparsity-rows" => {
                sparsity_rows = Some(parse(&value(&mut args, "--sparsity-rows")?, "--sparsity-rows")?)
            }
            "--sparsity-cols" => {
                sparsity_cols = Some(parse(&value(&mut args, "--sparsity-cols")?, "--sparsity-cols")?)
            }
            "--rank" => rank = Some(parse(&value(&mut args, "--rank")?, "--rank")?),
            "--tune" => tune = true,
            "--min-rank" => min_rank = parse(&value(&mut args, "--min-rank")?, "--min-rank")?,
            "--epsilon" => epsilon = parse(&value(&mut args, "--epsilon")?, "--epsilon")?,
            "--max-iter" => max_iter = parse(&value(&mut args, "--max-iter")?, "--max-iter")?,
            "--seed" => seed = parse(&value(&mut args, "--seed")?, "--seed")?,
            "--priority" => {
                priority = match value(&mut args, "--priority")?.as_str() {
                    "sparsity-last" => PocsPriority::SparsityLast,
                    "orthogonality-last" => PocsPriority::OrthogonalityLast,
                    other => {
                        return Err(Error::InvalidConfig(format!(
                            "--priority: expected sparsity-last or orthogonality-last, got {other:?}"
                        )))
                    }
                }
            }
            "--drop-empty" => drop_empty = true,
            "--svg" => svg = true,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown flag {other:?}; see --help"
                )))
            }
        }
    }

    let config = RunConfig {
        method,
        input: input.ok_or_else(|| Error::InvalidConfig("--input is required".into()))?,
        out: out.ok_or_else(|| Error::InvalidConfig("--out is required".into()))?,
        groups,
        sparsity_rows,
        sparsity_cols,
        rank,
        tune,
        min_rank,
        epsilon,
        max_iter,
        seed,
        priority,
        drop_empty,
        svg,
    };
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.method.is_discriminant() && self.groups.is_none() {
            return Err(Error::InvalidConfig(format!(
                "{} needs --groups COL",
                self.method.name()
            )));
        }
        if !self.method.is_discriminant() && self.groups.is_some() {
            return Err(Error::InvalidConfig(format!(
                "--groups only applies to disca/dimca, not {}",
                self.method.name()
            )));
        }
        if self.tune && self.rank.is_some() {
            return Err(Error::InvalidConfig(
                "--tune and --rank are mutually exclusive".into(),
            ));
        }
        if self.tune && (self.sparsity_rows.is_some() || self.sparsity_cols.is_some()) {
            return Err(Error::InvalidConfig(
                "--tune searches the radii; drop --sparsity-rows/--sparsity-cols".into(),
            ));
        }
        for (flag, v) in [
            ("--sparsity-rows", self.sparsity_rows),
            ("--sparsity-cols", self.sparsity_cols),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "{flag} {v} must lie in (0, 1]"
                    )));
                }
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig("--epsilon must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("--max-iter must be positive".into()));
        }
        if self.min_rank == 0 {
            return Err(Error::InvalidConfig("--min-rank must be positive".into()));
        }
        Ok(())
    }

    fn wants_sparsity(&self) -> bool {
        self.sparsity_rows.is_some() || self.sparsity_cols.is_some()
    }
}

/// Everything `run` produces besides the files on disk.
#[derive(Debug)]
pub struct RunOutcome {
    pub bundle: ResultBundle,
    pub written: Vec<PathBuf>,
}

struct LoadedInput {
    prepared: Prepared,
    /// Raw per-observation rows for the discriminant methods (counts for
    /// DiSCA, indicator rows for DiMCA) plus their design and labels.
    observations: Option<(Matrix, GroupDesign, Vec<String>)>,
    notes: Vec<String>,
}

fn load(config: &RunConfig) -> Result<LoadedInput> {
    let file = std::fs::File::open(&config.input)?;
    match config.method {
        CaMethod::Ca => {
            let ingest = ingest_contingency(file, None, config.drop_empty)?;
            Ok(LoadedInput {
                prepared: preprocess_ca(&ingest.table)?,
                observations: None,
                notes: ingest.notes,
            })
        }
        CaMethod::Disca => {
            let ingest =
                ingest_contingency(file, config.groups.as_deref(), config.drop_empty)?;
            let groups = ingest.groups.expect("groups validated in RunConfig");
            let prepared = preprocess_disca(&ingest.table, &groups)?;
            let labels = ingest.table.row_labels().to_vec();
            Ok(LoadedInput {
                prepared,
                observations: Some((ingest.table.counts().clone(), groups, labels)),
                notes: ingest.notes,
            })
        }
        CaMethod::Mca => {
            let ingest = ingest_categorical(file, None)?;
            Ok(LoadedInput {
                prepared: preprocess_mca(&ingest.table)?,
                observations: None,
                notes: Vec::new(),
            })
        }
        CaMethod::Dimca => {
            let ingest = ingest_categorical(file, config.groups.as_deref())?;
            let groups = ingest.groups.expect("groups validated in RunConfig");
            let prepared = preprocess_dimca(&ingest.table, &groups)?;
            let labels = ingest.table.row_labels().to_vec();
            Ok(LoadedInput {
                prepared,
                observations: Some((ingest.table.indicator().clone(), groups, labels)),
                notes: Vec::new(),
            })
        }
    }
}

fn default_grid(config: &RunConfig, prep: &Prepared) -> GridSpec {
    let bound = prep.x.rows().min(prep.x.cols()).saturating_sub(1).max(1);
    let lo = config.min_rank.min(bound);
    let hi = (config.min_rank + 2).min(bound);
    let ranks: Vec<usize> = (lo..=hi).collect();
    let mut spec = GridSpec::new(
        GridSpec::default_fractions(),
        GridSpec::default_fractions(),
        ranks,
    );
    spec.epsilon = config.epsilon;
    spec.max_iter = config.max_iter;
    spec.priority = config.priority;
    spec
}

/// Runs the whole pipeline and writes `results.json`, `F.csv`, `G.csv`,
/// `contributions.csv`, `tuning.csv` (tuned runs), and the SVG plots when
/// requested. Returns the bundle so callers can inspect it.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let loaded = load(config)?;
    let prep = &loaded.prepared;
    let mut warnings = loaded.notes.clone();

    let (model, tuning, grid_spec) = if config.tune {
        let spec = default_grid(config, prep);
        let grid = grid_search(prep, &spec, IndexSelector::Both)?;
        let model = fit_best(prep, &grid, &spec)?;
        (model, Some(grid), Some(spec))
    } else {
        let sparsity = if config.wants_sparsity() {
            Some(SparsitySpec::fractions(
                config.sparsity_rows.unwrap_or(1.0),
                config.sparsity_cols.unwrap_or(1.0),
            ))
        } else {
            None
        };
        let options = FitOptions {
            rank: config.rank,
            epsilon: config.epsilon,
            max_iter: config.max_iter,
            priority: config.priority,
            sparsity,
        };
        (fit_prepared(prep, &options)?, None, None)
    };

    let mut bundle = ResultBundle::from_model(&model, config.seed);
    bundle.warnings.append(&mut warnings);
    bundle.tuning = tuning;

    if let Decomposition::Sparse(sparse) = &model.decomposition {
        bundle.sparsity = Some(sparsity_summary(&model, sparse, config)?);
    }

    bundle.properties = Some(check_properties(&model)?);

    if let Some((observations, groups, labels)) = &loaded.observations {
        let scores: Result<Vec<Vec<f64>>> = (0..observations.rows())
            .map(|i| crate::ca::supplementary_row(&model, observations.row(i)))
            .collect();
        bundle.supplementary_rows = Some(SupplementaryBlock {
            labels: labels.clone(),
            scores: scores?,
        });
        bundle.classification = Some(classify_nearest_group(&model, observations, groups)?);
        let pairs: Vec<(usize, usize)> = if model.rank() >= 2 {
            vec![(0, 1)]
        } else {
            vec![(0, 0)]
        };
        bundle.bootstrap = Some(bootstrap_group_means(
            &model,
            observations,
            groups,
            &BootstrapSpec {
                seed: config.seed,
                ..BootstrapSpec::default()
            },
            &pairs,
        )?);
    }

    if !bundle.converged {
        bundle
            .warnings
            .push("at least one dimension did not converge within the iteration budget".into());
    }

    let written = write_outputs(config, &bundle, grid_spec.as_ref())?;
    Ok(RunOutcome { bundle, written })
}

fn sparsity_summary(
    model: &CaModel,
    sparse: &SparseGsvdResult,
    config: &RunConfig,
) -> Result<SparsitySummary> {
    let (row_fraction, col_fraction) = match &model.options.sparsity {
        Some(s) => (s.row_fraction, s.col_fraction),
        None => (1.0, 1.0),
    };
    let row_metric = DiagonalMetric::inverse_of(&model.row_masses)?;
    let col_metric = DiagonalMetric::inverse_of(&model.col_masses)?;
    let reference = crate::als::als_gsvd(
        &model.x,
        &row_metric,
        &col_metric,
        model.rank(),
        config.epsilon,
        config.max_iter,
    )?;
    let indices =
        sparsity_indices(sparse, &reference, model.rank(), &ZoneThresholds::default()).ok();
    Ok(SparsitySummary {
        row_fraction,
        col_fraction,
        indices,
    })
}

fn write_outputs(
    config: &RunConfig,
    bundle: &ResultBundle,
    grid_spec: Option<&GridSpec>,
) -> Result<Vec<PathBuf>> {
    let dir = &config.out;
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut record = |p: PathBuf| written.push(p);

    let results = dir.join("results.json");
    write_text(&results, &bundle.to_json()?)?;
    record(results);

    let f_csv = dir.join("F.csv");
    write_scores_csv(&f_csv, &bundle.row_labels, &bundle.row_scores)?;
    record(f_csv);
    let g_csv = dir.join("G.csv");
    write_scores_csv(&g_csv, &bundle.col_labels, &bundle.col_scores)?;
    record(g_csv);
    let ctr = dir.join("contributions.csv");
    write_contributions_csv(&ctr, bundle)?;
    record(ctr);

    if let Some(grid) = &bundle.tuning {
        let tuning = dir.join("tuning.csv");
        write_tuning_csv(&tuning, grid)?;
        record(tuning);
    }

    if config.svg {
        let thresholds = grid_spec
            .map(|s| s.thresholds)
            .unwrap_or_default();
        let scree = dir.join("scree.svg");
        write_text(&scree, &scree_svg(bundle))?;
        record(scree);
        let map = dir.join("sparsity_map.svg");
        write_text(&map, &sparsity_map_svg(bundle, &thresholds))?;
        record(map);
        let mut pairs = Vec::new();
        if bundle.rank >= 2 {
            pairs.push((0usize, 1usize));
        }
        if bundle.rank >= 3 {
            pairs.push((1, 2));
        }
        for (a, b) in pairs {
            let fm = dir.join(format!("factor_map_{}_{}.svg", a + 1, b + 1));
            write_text(&fm, &factor_map_svg(bundle, a, b))?;
            record(fm);
        }
    }
    Ok(written)
}

/// Convenience for tests and examples: run against an explicit output dir.
pub fn run_to_dir(mut config: RunConfig, dir: &Path) -> Result<RunOutcome> {
    config.out = dir.to_path_buf();
    run(&config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(|t| t.to_string()).collect()
    }

    #[test]
    fn parses_the_full_surface() {
        let cfg = parse_args(args(
            "disca --input t.csv --groups origin --sparsity-rows 0.71 --sparsity-cols 0.41 \
             --rank 2 --epsilon 1e-10 --max-iter 500 --seed 9 --priority orthogonality-last \
             --drop-empty --svg --out out",
        ))
        .unwrap();
        assert_eq!(cfg.method, CaMethod::Disca);
        assert_eq!(cfg.groups.as_deref(), Some("origin"));
        assert_eq!(cfg.sparsity_rows, Some(0.71));
        assert_eq!(cfg.rank, Some(2));
        assert_eq!(cfg.epsilon, 1e-10);
        assert_eq!(cfg.max_iter, 500);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.priority, PocsPriority::OrthogonalityLast);
        assert!(cfg.drop_empty && cfg.svg);
    }

    #[test]
    fn discriminant_methods_require_groups() {
        let err = parse_args(args("disca --input t.csv --out o")).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
        let err = parse_args(args("ca --input t.csv --groups g --out o")).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn tune_and_rank_are_exclusive() {
        let err = parse_args(args("ca --input t.csv --out o --tune --rank 2")).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn rejects_out_of_range_fractions() {
        let err =
            parse_args(args("ca --input t.csv --out o --sparsity-rows 1.5")).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn unknown_flags_are_rejected() {
        let err = parse_args(args("ca --input t.csv --out o --frobnicate")).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }
}
