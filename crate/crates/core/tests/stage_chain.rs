//! Regimes, per-regime volatility, the daily path and per-trade mispricing
//! chained on a simulated market.

use chrono::{Days, NaiveDate, TimeZone, Utc};
use optbench_core::mispricing::{compute_mispricing, iv_gap_report};
use optbench_core::pricing::{bs_price, PricingInput};
use optbench_core::regime_switching::{
    classify, fit_msar, MsArOptions, MsArParams, MsArSpec, RegimeLabel, RegimeParams,
};
use optbench_core::simulate::simulate_msar;
use optbench_core::volatility::{
    build_vol_path, fit_garch, regime_subsample, select_best, GarchOptions, GarchSpec, VolatilityPath,
};
use optbench_core::{Moneyness, OptionKind, OptionTrade, ReturnPoint, ReturnSeries};

fn market() -> ReturnSeries {
    let params = MsArParams {
        regimes: [
            RegimeParams { intercept: 0.1, ar: vec![0.05], variance: 1.0 },
            RegimeParams { intercept: -0.1, ar: vec![0.0], variance: 16.0 },
        ],
        p00: 0.97,
        p10: 0.05,
    };
    let (y, _) = simulate_msar(&params, 900, 100, 42);
    let start = NaiveDate::from_ymd_opt(2019, 1, 1).unwrap();
    ReturnSeries {
        asset: "SIM".into(),
        points: y
            .iter()
            .enumerate()
            .map(|(i, v)| ReturnPoint {
                date: start + Days::new(i as u64),
                value: *v,
                volume: 1e6 * (2.0 + (i as f64).sin()),
            })
            .collect(),
    }
}

fn vol_path(series: &ReturnSeries) -> VolatilityPath {
    let fit = fit_msar(series, MsArSpec::new(1), 1, &MsArOptions::default()).unwrap();
    assert!(fit.params.regimes[0].variance < fit.params.regimes[1].variance);
    let labels = classify(&fit);
    assert!(labels.count(RegimeLabel::Regime(0)) > 200 && labels.count(RegimeLabel::Regime(1)) > 200);
    let spec = GarchSpec::new(1, 0, 1).unwrap();
    let fits: Vec<_> = (0..2)
        .map(|r| {
            let sub = regime_subsample(series, &labels, r);
            select_best([(spec, fit_garch(&sub, spec, 7 + r as u64, &GarchOptions::default()))]).unwrap().fit
        })
        .collect();
    let path = build_vol_path(&labels, [(&fits[0]).into(), (&fits[1]).into()], &fit.dates, 365.0).unwrap();
    // every labeled day reads its own regime; inherited days copy the last labeled one
    for (i, p) in path.points.iter().enumerate() {
        match p.label {
            RegimeLabel::Regime(r) => assert!(!p.inherited && p.source_regime == r),
            RegimeLabel::Uncertain => {
                assert!(p.inherited);
                assert_eq!(p.sigma_annualized, path.points[i - 1].sigma_annualized);
            }
        }
    }
    assert_eq!(path.points.len() + path.unresolved.len(), fit.dates.len());
    path
}

#[test]
fn chained_stages_keep_the_mispricing_identities() {
    let series = market();
    let path = vol_path(&series);
    let day = |i: usize| path.points[i].date;
    let mut trades = Vec::new();
    for i in 0..60 {
        let d = day(50 + 13 * i);
        let kind = if i % 2 == 0 { OptionKind::Call } else { OptionKind::Put };
        let step = [1.0, 1.1, 1.2][i % 3];
        let ratio = match kind {
            OptionKind::Call => step,
            OptionKind::Put => 2.0 - step,
        };
        let spot = 1000.0 + i as f64;
        trades.push(OptionTrade {
            trade_id: format!("T{i:03}"),
            underlying: "SIM".into(),
            kind,
            moneyness: if i % 3 == 0 { Moneyness::Atm } else { Moneyness::Otm },
            strike: spot * ratio,
            maturity_days: [7, 14, 30, 60, 90][i % 5],
            amount: 0.5 + i as f64,
            premium_paid: (0.5 + i as f64) * spot * 0.01 * (1.0 + (i % 7) as f64),
            spot,
            timestamp: Utc.from_utc_datetime(&d.and_hms_opt(12, 0, 0).unwrap()),
        });
    }
    trades.push(OptionTrade { trade_id: "ZERO".into(), premium_paid: 0.0, ..trades[0].clone() });
    for t in &trades {
        t.validate().unwrap();
    }
    let (rows, excluded) = compute_mispricing(&trades, &series, &path, 0.0).unwrap();
    assert_eq!(rows.len(), 60);
    assert_eq!(excluded.len(), 1);
    assert_eq!(excluded[0].trade_id, "ZERO");
    assert!(rows.windows(2).all(|w| (w[0].timestamp, &w[0].trade_id) <= (w[1].timestamp, &w[1].trade_id)));
    for r in &rows {
        assert_eq!(r.delta_price, (r.benchmark - r.quote) / r.quote);
        assert_eq!(r.benchmark > r.quote, r.delta_price > 0.0);
        assert_eq!(r.sigma, path.sigma_on(r.date()).unwrap());
        assert_eq!(r.underlying_return, series.get(r.date()).unwrap().value);
    }
}

#[test]
fn premium_at_benchmark_gives_zero_gap() {
    let series = market();
    let path = vol_path(&series);
    let trades: Vec<OptionTrade> = (0..20)
        .map(|i| {
            let d = path.points[100 + 31 * i].date;
            let sigma = path.sigma_on(d).unwrap();
            let (kind, ratio) = if i % 2 == 0 { (OptionKind::Call, 1.1) } else { (OptionKind::Put, 0.9) };
            let input = PricingInput::from_days(500.0, 500.0 * ratio, 0.0, 30.0, sigma);
            let fair = bs_price(&input, kind).unwrap();
            OptionTrade {
                trade_id: format!("F{i}"),
                underlying: "SIM".into(),
                kind,
                moneyness: Moneyness::Otm,
                strike: 500.0 * ratio,
                maturity_days: 30,
                amount: 2.0,
                premium_paid: 2.0 * fair,
                spot: 500.0,
                timestamp: Utc.from_utc_datetime(&d.and_hms_opt(0, 0, 0).unwrap()),
            }
        })
        .collect();
    let (rows, _) = compute_mispricing(&trades, &series, &path, 0.0).unwrap();
    for r in &rows {
        assert!(r.delta_price.abs() < 1e-12);
        assert!(r.iv_gap().unwrap().abs() < 1e-6);
    }
    let report = iv_gap_report(&rows);
    assert_eq!(report.buckets.len(), 2);
    for b in &report.buckets {
        assert!(b.summary.mean.abs() < 1e-6);
    }
}

#[test]
fn trade_outside_the_path_is_an_alignment_error() {
    let series = market();
    let path = vol_path(&series);
    let late = path.points.last().unwrap().date + Days::new(10);
    let t = OptionTrade {
        trade_id: "L".into(),
        underlying: "SIM".into(),
        kind: OptionKind::Call,
        moneyness: Moneyness::Atm,
        strike: 100.0,
        maturity_days: 30,
        amount: 1.0,
        premium_paid: 5.0,
        spot: 100.0,
        timestamp: Utc.from_utc_datetime(&late.and_hms_opt(0, 0, 0).unwrap()),
    };
    assert!(compute_mispricing(&[t], &series, &path, 0.0).is_err());
}

#[test]
fn residual_input_uses_the_more_probable_regime() {
    use optbench_core::regime_switching::regime_residuals;
    let series = market();
    let fit = fit_msar(&series, MsArSpec::new(1), 1, &MsArOptions::default()).unwrap();
    let resid = regime_residuals(&fit.params, &fit.smoothed, &series).unwrap();
    assert_eq!(resid.points.len(), series.points.len() - 1);
    for (t, p) in resid.points.iter().enumerate().step_by(97) {
        let s = usize::from(fit.smoothed[t][1] > fit.smoothed[t][0]);
        let r = &fit.params.regimes[s];
        let mean = r.intercept + r.ar[0] * series.points[t].value;
        assert_eq!(p.date, series.points[t + 1].date);
        assert!((p.value - (series.points[t + 1].value - mean)).abs() < 1e-12);
    }
    let short = ReturnSeries { asset: "SIM".into(), points: series.points[..100].to_vec() };
    assert!(regime_residuals(&fit.params, &fit.smoothed, &short).is_err());
}
