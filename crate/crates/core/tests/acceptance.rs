//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when the set of failing criteria differs from `KNOWN_RED`.

use std::f64::consts::TAU;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use npc_reliability::config::RunConfig;
use npc_reliability::dclink::simulate_np_voltages;
use npc_reliability::devices::{commutation_energy, DeviceSet};
use npc_reliability::losses::{
    closed_form_grid, loss_distribution, switching_loss, validate_closed_forms, DeviceRole, Quadrature,
};
use npc_reliability::modulation::{load_current, modulating_function};
use npc_reliability::pipeline::{compare_strategies, evaluate_strategy, Mode, StrategyReport};
use npc_reliability::reliability::{
    capacitor_lifetime, inverter_failure_rate, mttf, pi_cp, pi_t, CapacitorLifetimeModel, PartClass,
    PartFailureRate, PartType,
};
use npc_reliability::thermal::{junction_temperature, ThermalPath};
use npc_reliability::{OperatingPoint, StrategyId};

/// Criteria expected to fail; see the README for the analysis.
const KNOWN_RED: &[u8] = &[1, 7];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Published failure rates per device group, columns S1/S4, S2/S3, D1–D4,
/// D5/D6, C1, C2.
const PUBLISHED_RATES: [(StrategyId, [f64; 6]); 3] = [
    (StrategyId::Spwm, [1.640, 2.039, 0.042, 0.053, 0.193, 0.193]),
    (StrategyId::Thipwm, [1.537, 1.692, 0.042, 0.047, 0.155, 0.155]),
    (StrategyId::Svpwm, [1.491, 1.632, 0.042, 0.045, 0.059, 0.369]),
];
const GROUPS: [&str; 6] = ["S1/S4", "S2/S3", "D1-D4", "D5/D6", "C1", "C2"];

fn group_rates(r: &StrategyReport) -> [f64; 6] {
    [
        r.device(DeviceRole::S1).rate,
        r.device(DeviceRole::S2).rate,
        r.device(DeviceRole::D1).rate,
        r.device(DeviceRole::D5).rate,
        r.capacitors[0].rate,
        r.capacitors[1].rate,
    ]
}

fn criterion_1() -> Outcome {
    let cfg = RunConfig::default();
    let start = Instant::now();
    let reports: Vec<_> = StrategyId::ALL
        .iter()
        .map(|&s| evaluate_strategy(&cfg, s, Mode::PaperFactors).unwrap())
        .collect();
    let elapsed = start.elapsed();
    let mut misses = Vec::new();
    let mut worst: f64 = 0.0;
    for (report, (strategy, published)) in reports.iter().zip(PUBLISHED_RATES) {
        for (k, (got, want)) in group_rates(report).iter().zip(published).enumerate() {
            let e = rel(*got, want);
            worst = worst.max(e);
            if e > 5e-3 {
                misses.push(format!("{strategy} {} {got:.5} vs {want:.3} ({:+.2}%)", GROUPS[k], 100.0 * (got / want - 1.0)));
            }
        }
    }
    let fast = elapsed < Duration::from_secs(1);
    Outcome::new(
        misses.is_empty() && fast,
        format!(
            "18 entries, worst {:.2}%, {:.3} s{}",
            100.0 * worst,
            elapsed.as_secs_f64(),
            if misses.is_empty() { String::new() } else { format!("; outside ±0.5%: {}", misses.join(", ")) }
        ),
    )
}

fn published_parts(rates: &[f64; 6]) -> Vec<PartFailureRate> {
    let mut parts = Vec::new();
    let mut push = |class, rate, n| {
        for _ in 0..n {
            parts.push(PartFailureRate { part: String::new(), class, rate });
        }
    };
    push(PartClass::Mosfet, rates[0], 6);
    push(PartClass::Mosfet, rates[1], 6);
    push(PartClass::FreewheelDiode, rates[2], 12);
    push(PartClass::ClampDiode, rates[3], 6);
    push(PartClass::Capacitor, rates[4], 1);
    push(PartClass::Capacitor, rates[5], 1);
    parts
}

fn criterion_2() -> Outcome {
    // Quoted MTTFs in hours. The SVPWM quote is 15 h below what its own
    // published rates give (50,150 h), a rounding artefact of those rates,
    // hence the looser tolerance for that strategy only.
    let quoted = [(StrategyId::Spwm, 42_951.0), (StrategyId::Thipwm, 48_852.0), (StrategyId::Svpwm, 50_135.0)];
    let cfg = RunConfig::default();
    let mut ok = true;
    let mut detail = Vec::new();
    for ((strategy, rates), (_, want)) in PUBLISHED_RATES.iter().zip(quoted) {
        let lambda = inverter_failure_rate(&published_parts(rates)).unwrap();
        let h = mttf(lambda).unwrap();
        let good = match strategy {
            StrategyId::Svpwm => rel(h, want) < 5e-3,
            _ => (h - want).abs() < 1.0,
        };
        ok &= good;
        let model = evaluate_strategy(&cfg, *strategy, Mode::PaperFactors).unwrap().mttf_hours;
        detail.push(format!("{strategy} {h:.1} h (pipeline {model:.1} h)"));
    }
    Outcome::new(ok, detail.join(", "))
}

fn criterion_3() -> Outcome {
    let checks = [
        ("πT(mosfet, 64.68 °C)", pi_t(PartType::Mosfet, 64.68), 2.136),
        ("πT(mosfet, 78.06 °C)", pi_t(PartType::Mosfet, 78.06), 2.655),
        ("πT(diode, 34.85 °C)", pi_t(PartType::Diode, 34.85), 1.394),
        ("πCP(470 µF)", pi_cp(470.0), 4.12),
    ];
    let worst = checks.iter().map(|c| rel(c.1, c.2)).fold(0.0, f64::max);
    let detail = checks.iter().map(|c| format!("{} = {:.4}", c.0, c.1)).collect::<Vec<_>>().join(", ");
    Outcome::new(worst < 5e-3, format!("{detail}; worst {:.3}%", 100.0 * worst))
}

fn criterion_4() -> Outcome {
    let path = ThermalPath::free_air(1.0, 61.0);
    let t = junction_temperature(0.64, 25.0, &path).unwrap();
    let exact = (t.t_case - 64.04).abs() < 1e-9 && (t.t_junction - 64.68).abs() < 1e-9;
    let mut linear = true;
    for k in 1..50 {
        let p = 0.037 * k as f64;
        let a = junction_temperature(p, 25.0, &path).unwrap();
        let b = junction_temperature(2.0 * p, 25.0, &path).unwrap();
        linear &= ((b.t_junction - 25.0) - 2.0 * (a.t_junction - 25.0)).abs() < 1e-12;
    }
    Outcome::new(exact && linear, format!("Tc = {:.4} °C, Tj = {:.4} °C, linearity {}", t.t_case, t.t_junction, linear))
}

fn criterion_5() -> Outcome {
    let cfg = RunConfig::default();
    let start = Instant::now();
    let checks = validate_closed_forms(
        &cfg.device_set().unwrap(),
        &cfg.operating_point(),
        &closed_form_grid(),
        Quadrature::default(),
    )
    .unwrap();
    let elapsed = start.elapsed();
    // every formula either agrees everywhere or is flagged with the numeric value kept
    let consistent = checks.iter().all(|c| c.flagged == (c.relative_error > 5e-3) && c.numeric_w.is_finite());
    let mut flagged: Vec<String> = checks
        .iter()
        .filter(|c| c.flagged)
        .map(|c| format!("{} {}", c.strategy, c.role))
        .collect();
    flagged.sort();
    flagged.dedup();
    let worst_ok = checks.iter().filter(|c| !c.flagged).map(|c| c.relative_error).fold(0.0, f64::max);
    Outcome::new(
        consistent && elapsed < Duration::from_secs(10),
        format!(
            "{} checks, worst agreeing {:.1e}, flagged [{}], {:.2} s",
            checks.len(),
            worst_ok,
            flagged.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

/// Switching loss per role from an explicit walk over the carrier half-periods
/// of one fundamental cycle.
///
/// Phase-disposition carriers: the upper one spans [0, 1], the lower one is the
/// same triangle shifted by −1. On each monotone carrier half-period the
/// reference is slower than the carrier, so it crosses each carrier at most
/// once; every crossing is a transition charged at the current of its instant.
/// `carrier_phase` shifts the carriers by that fraction of a carrier period.
fn enumerated_switching(
    strategy: StrategyId,
    op: &OperatingPoint,
    devices: &DeviceSet,
    carrier_phase: f64,
) -> [f64; 10] {
    use DeviceRole::*;
    let period = 1.0 / op.output_frequency;
    let tc = 1.0 / op.carrier_frequency;
    let m = op.modulation_index;
    let phi = op.phase_lag;
    let reference = |t: f64| modulating_function(strategy, m, TAU * t / period - phi, phi).unwrap();
    let upper = |t: f64| {
        let u = (t / tc + carrier_phase).rem_euclid(1.0);
        1.0 - (2.0 * u - 1.0).abs()
    };
    let e = |fit, i: f64| commutation_energy(fit, i).unwrap();
    let (sw, fw, cl) = (&devices.switch, &devices.freewheel, &devices.clamp);

    let halves = (2.0 * period / tc).round() as usize;
    let first = ((2.0 * carrier_phase).ceil() / 2.0 - carrier_phase) * tc;
    let mut energy = [0.0; 10];
    for h in 0..halves {
        let a = first + h as f64 * tc / 2.0;
        let b = a + tc / 2.0;
        for offset in [0.0, -1.0] {
            let g = |t: f64| reference(t) - (upper(t) + offset);
            let (ga, gb) = (g(a), g(b));
            // a touch without a sign change is a zero-width pulse
            if ga * gb >= 0.0 {
                continue;
            }
            let (mut lo, mut hi) = (a, b);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if g(mid) * ga > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = 0.5 * (lo + hi);
            let i = load_current(m, TAU * t / period, phi, op.peak_current);
            if i == 0.0 {
                continue;
            }
            let mag = i.abs();
            let rising = gb > 0.0;
            let mut add = |role: DeviceRole, j: f64| energy[role.index()] += j;
            match (offset == 0.0, rising, i > 0.0) {
                // zero → positive, positive → zero
                (true, true, true) => {
                    add(S1, e(&sw.eon, mag));
                    add(D5, e(&cl.erec, mag));
                }
                (true, false, true) => add(S1, e(&sw.eoff, mag)),
                (true, false, false) => {
                    add(S3, e(&sw.eon, mag));
                    add(D1, e(&fw.erec, mag));
                }
                (true, true, false) => add(S3, e(&sw.eoff, mag)),
                // negative → zero, zero → negative
                (false, true, true) => {
                    add(S2, e(&sw.eon, mag));
                    add(D4, e(&fw.erec, mag));
                }
                (false, false, true) => add(S2, e(&sw.eoff, mag)),
                (false, false, false) => {
                    add(S4, e(&sw.eon, mag));
                    add(D6, e(&cl.erec, mag));
                }
                (false, true, false) => add(S4, e(&sw.eoff, mag)),
            }
        }
    }
    energy.map(|j| j / period)
}

fn criterion_6() -> Outcome {
    let cfg = RunConfig::default();
    let op = cfg.operating_point();
    let devices = cfg.device_set().unwrap();
    // Carrier phase relative to the fundamental is not fixed by the operating
    // point, so the comparison runs over eight phases that avoid the
    // coincidence of a carrier valley with the current zero crossing.
    let phases: Vec<f64> = (0..8).map(|j| (j as f64 + 0.5) / 8.0).collect();
    let mut worst: f64 = 0.0;
    let mut misses = Vec::new();
    let mut legs = Vec::new();
    for strategy in StrategyId::ALL {
        let lib: Vec<f64> = DeviceRole::ALL
            .iter()
            .map(|&r| switching_loss(r, &devices, &op, strategy).unwrap())
            .collect();
        for &p in &phases {
            let oracle = enumerated_switching(strategy, &op, &devices, p);
            for role in DeviceRole::ALL {
                let (l, o) = (lib[role.index()], oracle[role.index()]);
                if l == 0.0 && o == 0.0 {
                    continue;
                }
                let err = rel(l, o);
                worst = worst.max(err);
                if err > 5e-3 {
                    misses.push(format!("{strategy} {role} phase {p}: {l:.4e} vs {o:.4e}"));
                }
            }
        }
        legs.push(format!("{strategy} leg {:.4e} W", lib.iter().sum::<f64>()));
    }
    Outcome::new(
        misses.is_empty(),
        format!(
            "{} phases, worst {:.3}%; {}{}",
            phases.len(),
            100.0 * worst,
            legs.join(", "),
            if misses.is_empty() { String::new() } else { format!("; outside 0.5%: {}", misses.join(", ")) }
        ),
    )
}

fn criterion_7() -> Outcome {
    let cfg = RunConfig::default();
    let op = cfg.operating_point();
    let devices = cfg.device_set().unwrap();
    let mut fails = Vec::new();

    let model: Vec<StrategyReport> = StrategyId::ALL
        .iter()
        .map(|&s| evaluate_strategy(&cfg, s, Mode::Model).unwrap())
        .collect();
    for s in StrategyId::ALL {
        let d = loss_distribution(&op, s, &devices, Quadrature::default()).unwrap();
        if !(d.get(DeviceRole::S2).total > d.get(DeviceRole::S1).total) {
            fails.push(format!("{s}: P(S2) ≤ P(S1)"));
        }
    }
    for role in [DeviceRole::S1, DeviceRole::S2] {
        let p: Vec<f64> = model.iter().map(|r| r.device(role).losses.total).collect();
        let tj: Vec<f64> = model.iter().map(|r| r.device(role).temperatures.t_junction).collect();
        if !(p[0] > p[1] && p[1] > p[2]) {
            fails.push(format!("{role} loss SPWM/THIPWM/SVPWM = {:.4}/{:.4}/{:.4} W", p[0], p[1], p[2]));
        }
        if !(tj[0] > tj[1] && tj[1] > tj[2]) {
            fails.push(format!("{role} Tj = {:.2}/{:.2}/{:.2} °C", tj[0], tj[1], tj[2]));
        }
    }
    let h: Vec<f64> = model.iter().map(|r| r.mttf_hours).collect();
    if !(h[2] > h[1] && h[1] > h[0]) {
        fails.push(format!("model MTTF SPWM/THIPWM/SVPWM = {:.0}/{:.0}/{:.0} h", h[0], h[1], h[2]));
    }
    let factored = compare_strategies(&cfg, Mode::PaperFactors).unwrap();
    let ph: Vec<f64> = factored.strategies.iter().map(|r| r.mttf_hours).collect();
    let factored_ok = ph[2] > ph[1] && ph[1] > ph[0];
    if !factored_ok {
        fails.push("MTTF ordering in paper-factors mode".into());
    }
    Outcome::new(
        fails.is_empty(),
        if fails.is_empty() { "all orderings hold".to_string() } else { format!("violated: {}", fails.join("; ")) },
    )
}

fn criterion_8() -> Outcome {
    let doubling = CapacitorLifetimeModel::TenDegreeDoubling { l0: 1000.0, v0: 100.0, t0: 360.0, n: 3.0 };
    let a = capacitor_lifetime(&doubling, 100.0, 350.0, 1.0).unwrap();
    let b = capacitor_lifetime(&doubling, 100.0, 340.0, 1.0).unwrap();
    let power = CapacitorLifetimeModel::ArrheniusPower { l0: 1000.0, v0: 100.0, t0: 358.15, n: 3.0, ea: 0.94 };
    let c = capacitor_lifetime(&power, 200.0, 358.15, 1.0).unwrap();
    let ok = a == 2000.0 && b == 4000.0 && c == 125.0;
    Outcome::new(ok, format!("−10 K → {a} h, −20 K → {b} h, 2·V0 with n = 3 → {c} h"))
}

fn criterion_9() -> Outcome {
    let cfg = RunConfig::default();
    let op = cfg.operating_point();
    let half = op.dc_link_voltage / 2.0;
    let mut ok = true;
    let mut detail = Vec::new();
    for s in StrategyId::ALL {
        let r = simulate_np_voltages(
            s,
            &op,
            (&cfg.capacitors.c1, &cfg.capacitors.c2),
            cfg.strategy(s).policy,
            &cfg.dclink_settings(),
        )
        .unwrap();
        let dv = r.c2.v_dc - r.c1.v_dc;
        let good = match s {
            StrategyId::Svpwm => dv > 0.0,
            _ => dv.abs() < 0.01 * half,
        } && r.max_sum_error < 1e-9;
        ok &= good;
        detail.push(format!("{s} V_C2 − V_C1 = {dv:+.3} V, sum error {:.1e} V", r.max_sum_error));
    }
    Outcome::new(ok, detail.join(", "))
}

fn criterion_10() -> Outcome {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_npc-rel"))
            .args(["compare", "--mode", "paper-factors", "--format", "json"])
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .expect("run npc-rel")
    };
    let a = run("1");
    let b = run("4");
    let c = run("4");
    let ok = a.status.success() && a.stdout == b.stdout && b.stdout == c.stdout && !a.stdout.is_empty();
    Outcome::new(ok, format!("{} bytes, identical across runs and thread counts: {ok}", a.stdout.len()))
}

fn main() -> ExitCode {
    let criteria: [(u8, &str, fn() -> Outcome); 10] = [
        (1, "failure-rate table reproduction", criterion_1),
        (2, "MTTF reproduction", criterion_2),
        (3, "stress-factor values", criterion_3),
        (4, "thermal chain", criterion_4),
        (5, "conduction closed forms vs integrator", criterion_5),
        (6, "switching loss vs carrier enumeration", criterion_6),
        (7, "strategy orderings", criterion_7),
        (8, "capacitor lifetime models", criterion_8),
        (9, "DC-link simulator behaviour", criterion_9),
        (10, "determinism of compare", criterion_10),
    ];
    let mut failing = Vec::new();
    for (id, name, f) in criteria {
        let start = Instant::now();
        let o = f();
        println!(
            "criterion {id:>2} {} {name} [{:.2} s]: {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failing.push(id);
        }
    }
    println!("failing: {failing:?}, known red: {KNOWN_RED:?}");
    if failing == KNOWN_RED {
        ExitCode::SUCCESS
    } else {
        println!("the failing set differs from the known-red list");
        ExitCode::FAILURE
    }
}
