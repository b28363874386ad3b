use std::path::Path;

use gaussdiv::divergence::{evaluate_with, DistanceSpec, EvalOptions, Family, FloorChoice};
use gaussdiv::two_sample::{
    default_grid, pseudo_pair_distances, roc, run_test, sample_distance, select_parameter, simulate_example,
    simulate_test_rates, DistanceOptions, ParamAuc, Preset, SamplingScheme, SimulationConfig, SimulationRow, Statistic,
    TestConfig, TestRates,
};
use gaussdiv::Sample64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    DistArgs, DistanceArgs, FloorArg, ResampleArgs, RocArgs, SchemeArg, SelectArgs, SimulateArgs, TestArgs,
};
use crate::error::{CliError, Result};
use crate::input::{resolve_inputs, Input, SummaryJson};

fn family(name: &str) -> Result<Family> {
    Family::from_name(name).ok_or_else(|| {
        let known: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
        CliError::Usage(format!("unknown family `{name}` (known: {})", known.join(", ")))
    })
}

fn param_flag(args: &DistanceArgs, fam: Family) -> Result<Option<f64>> {
    let given = [("k", args.k.map(|k| k as f64)), ("p", args.p), ("delta", args.delta)];
    let expected = fam.parameter_name();
    for (name, v) in given {
        if v.is_some() && Some(name) != expected {
            return Err(CliError::Usage(format!(
                "--{name} does not apply to family `{}`",
                fam.name()
            )));
        }
    }
    Ok(given.iter().find(|(n, _)| Some(*n) == expected).and_then(|(_, v)| *v))
}

fn fixed_spec(args: &DistanceArgs) -> Result<DistanceSpec> {
    let fam = family(&args.family)?;
    Ok(fam.with_param(param_flag(args, fam)?)?)
}

fn options(args: &DistanceArgs) -> DistanceOptions {
    DistanceOptions {
        allow_negative_p: args.allow_negative_p,
        floor: match args.floor {
            FloorArg::Reject => FloorChoice::Reject,
            FloorArg::Clamp => FloorChoice::Clamp,
        },
        unbiased_simplicial: args.unbiased_simplicial,
    }
}

fn scheme(arg: SchemeArg, r: usize) -> SamplingScheme {
    match arg {
        SchemeArg::Subsample => SamplingScheme::WithoutReplacement { r },
        SchemeArg::Bootstrap => SamplingScheme::Bootstrap,
    }
}

fn params_json(spec: &DistanceSpec) -> Value {
    match (spec.family().parameter_name(), spec.param()) {
        (Some("k"), Some(v)) => json!({ "k": v as usize }),
        (Some(name), Some(v)) => json!({ name: v }),
        _ => json!({}),
    }
}

pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Write {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

pub fn dist(args: &DistArgs) -> Result<()> {
    let spec = fixed_spec(&args.distance)?;
    let opts = options(&args.distance);
    let (x, y) = resolve_inputs(&args.data)?;
    for (input, out) in [(&x, &args.x_summary_out), (&y, &args.y_summary_out)] {
        if let Some(path) = out {
            write_output(Some(path), &to_json(&SummaryJson::from(&input.summary()?))?)?;
        }
    }
    let value = match (&x, &y, &spec) {
        (Input::Sample(a), Input::Sample(b), _) => sample_distance(a, b, &spec, &opts)?,
        (_, _, DistanceSpec::Energy { .. }) => {
            return Err(gaussdiv::Error::UnsupportedForSummaries(spec.family().name().into()).into());
        }
        _ => {
            let (g1, g2) = (x.summary()?, y.summary()?);
            let eval = EvalOptions {
                allow_negative_p: opts.allow_negative_p,
                floor: opts.floor,
                unbiased_simplicial: None,
            };
            if opts.unbiased_simplicial {
                log::warn!("--unbiased-simplicial needs sample sizes and is ignored for summary inputs");
            }
            evaluate_with(&spec, &g1, &g2, &eval)?
        }
    };
    let out = json!({
        "family": spec.family().name(),
        "params": params_json(&spec),
        "value": value,
    });
    write_output(args.out.as_deref(), &to_json(&out)?)
}

fn samples(data: &crate::args::DataArgs) -> Result<(Sample64, Sample64)> {
    let (x, y) = resolve_inputs(data)?;
    Ok((x.into_sample("first")?, y.into_sample("second")?))
}

pub fn roc_cmd(args: &RocArgs) -> Result<()> {
    let spec = fixed_spec(&args.distance)?;
    let opts = options(&args.distance);
    let (x, y) = samples(&args.data)?;
    let n_pairs = args.resample.n_pairs.unwrap_or(x.n());
    let sch = scheme(args.resample.scheme, args.resample.r);
    let (d0, d1, failed) = pseudo_pair_distances(&x, &y, &spec, sch, n_pairs, args.resample.seed, &opts)?;
    let curve = roc(&d0, &d1)?;
    write_output(args.out.as_deref(), &curve.to_csv())?;
    if args.out.is_some() {
        let summary = json!({
            "family": spec.family().name(),
            "params": params_json(&spec),
            "auc": curve.auc,
            "pairs": n_pairs,
            "failed": failed,
        });
        print!("{}", to_json(&summary)?);
    }
    Ok(())
}

fn parse_grid(text: &str, fam: Family, d: usize) -> Result<Vec<f64>> {
    if text == "default" {
        return Ok(default_grid(fam, d)?);
    }
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("grid value `{t}` is not a number")))
        })
        .collect()
}

fn grid_family(args: &DistanceArgs) -> Result<Family> {
    let fam = family(&args.family)?;
    if fam.parameter_name().is_none() {
        return Err(CliError::Usage(format!(
            "family `{}` has no parameter to select",
            fam.name()
        )));
    }
    if args.k.is_some() || args.p.is_some() || args.delta.is_some() {
        return Err(CliError::Usage("a parameter flag conflicts with --grid".into()));
    }
    Ok(fam)
}

#[derive(Serialize)]
struct SelectReport {
    family: &'static str,
    selected: f64,
    auc_by_param: Vec<ParamAuc>,
    pairs: usize,
}

pub fn select(args: &SelectArgs) -> Result<()> {
    let fam = grid_family(&args.distance)?;
    let opts = options(&args.distance);
    let (x, y) = samples(&args.data)?;
    let grid = parse_grid(&args.grid, fam, x.dim())?;
    let n_pairs = args.resample.n_pairs.unwrap_or(x.n());
    let sel = select_parameter(
        &x,
        &y,
        fam,
        &grid,
        scheme(args.resample.scheme, args.resample.r),
        n_pairs,
        args.resample.seed,
        &opts,
    )?;
    let report = SelectReport {
        family: fam.name(),
        selected: sel.best.param().expect("grid families carry a parameter"),
        auc_by_param: sel.table,
        pairs: n_pairs,
    };
    write_output(args.out.as_deref(), &to_json(&report)?)
}

fn test_config(
    resample: &ResampleArgs,
    statistic: Statistic,
    n: usize,
    significance: f64,
    opts: DistanceOptions,
) -> TestConfig {
    let mut cfg = TestConfig::new(statistic, resample.n_pairs.unwrap_or(n), resample.seed);
    cfg.scheme = scheme(resample.scheme, resample.r);
    cfg.significance = significance;
    cfg.options = opts;
    cfg
}

pub fn test(args: &TestArgs) -> Result<()> {
    let opts = options(&args.distance);
    let (x, y) = samples(&args.data)?;
    let statistic = match &args.grid {
        Some(g) => {
            let fam = grid_family(&args.distance)?;
            Statistic::Grid {
                family: fam,
                grid: parse_grid(g, fam, x.dim())?,
            }
        }
        None => Statistic::Fixed(fixed_spec(&args.distance)?),
    };
    let cfg = test_config(&args.resample, statistic, x.n(), args.significance, opts);
    let result = run_test(&x, &y, &cfg)?;
    write_output(args.out.as_deref(), &to_json(&result)?)
}

fn parse_distance(text: &str) -> Result<DistanceSpec> {
    let (name, param) = match text.split_once(':') {
        Some((n, p)) => (
            n,
            Some(
                p.parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("parameter in `{text}` is not a number")))?,
            ),
        ),
        None => (text, None),
    };
    Ok(family(name)?.with_param(param)?)
}

#[derive(Serialize)]
struct SimulationReport<'a> {
    preset: Preset,
    n: usize,
    m: usize,
    d: usize,
    reps: usize,
    seed: u64,
    significance: f64,
    rows: &'a [SimulationRow],
    #[serde(skip_serializing_if = "Option::is_none")]
    rates: Option<Vec<TestRates>>,
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect::<String>()
        .trim_end_matches('_')
        .to_string()
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let preset = Preset::from_id(args.example, args.param)?;
    let distances = if args.distances.is_empty() {
        vec![
            DistanceSpec::Bhattacharyya,
            DistanceSpec::LogPhiPJb { p: 0.5 },
            DistanceSpec::LogSimplicialJb { k: 3 },
        ]
    } else {
        args.distances
            .iter()
            .map(|s| parse_distance(s))
            .collect::<Result<_>>()?
    };
    let cfg = SimulationConfig {
        preset,
        n: args.n,
        m: args.m,
        d: args.d,
        reps: args.reps,
        distances: distances.clone(),
        significance: args.significance,
        seed: args.seed,
        options: DistanceOptions::default(),
    };
    let rows = simulate_example(&cfg)?;
    if let Some(dir) = &args.roc_dir {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.clone(),
            source,
        })?;
        for row in &rows {
            let path = dir.join(format!("roc_{}.csv", file_stem(&row.label)));
            write_output(Some(&path), &row.roc()?.to_csv())?;
        }
    }
    let rates = if args.rates || !args.select.is_empty() {
        let mut tests: Vec<TestConfig> = Vec::new();
        let resample = ResampleArgs {
            n_pairs: args.n_pairs,
            r: args.r,
            scheme: args.scheme,
            seed: args.seed,
        };
        for spec in &distances {
            tests.push(test_config(
                &resample,
                Statistic::Fixed(*spec),
                args.n,
                args.significance,
                DistanceOptions::default(),
            ));
        }
        for name in &args.select {
            let fam = family(name)?;
            let grid = default_grid(fam, args.d)?;
            tests.push(test_config(
                &resample,
                Statistic::Grid { family: fam, grid },
                args.n,
                args.significance,
                DistanceOptions::default(),
            ));
        }
        Some(simulate_test_rates(
            preset, args.n, args.m, args.d, args.reps, &tests, args.seed,
        )?)
    } else {
        None
    };
    let report = SimulationReport {
        preset,
        n: args.n,
        m: args.m,
        d: args.d,
        reps: args.reps,
        seed: args.seed,
        significance: args.significance,
        rows: &rows,
        rates,
    };
    write_output(args.out.as_deref(), &to_json(&report)?)
}
