//! Total-cost-of-ownership model comparing the fingerprinting deployment
//! (fewer beacons, paid site survey) with the multilateration deployment
//! (more beacons, no survey).
//!
//! All currency math is exact integer cents. Beacon-room factors are parsed
//! as exact decimal ratios so `⌈rooms × factor⌉` never suffers float
//! artifacts (500 × 0.4 is 200, not 200.0000000003 rounded up).

use std::path::Path;

pub type Cents = i64;

#[derive(Debug, thiserror::Error)]
pub enum EconError {
    #[error("failed to read parameter file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parameter parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid parameters: {0}")]
    Invalid(String),
}

/// An exact non-negative decimal, `units / 10^scale`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecimalRatio {
    units: u64,
    denom: u64,
}

impl DecimalRatio {
    pub fn parse(text: &str) -> Result<DecimalRatio, String> {
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(format!("`{text}` is not a decimal"));
        }
        let digits = |s: &str| s.is_empty() || s.chars().all(|c| c.is_ascii_digit());
        if !digits(int_part) || !digits(frac_part) || frac_part.len() > 9 {
            return Err(format!("`{text}` is not a non-negative decimal"));
        }
        let denom = 10u64.pow(frac_part.len() as u32);
        let int_val: u64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|e| format!("`{text}`: {e}"))?
        };
        let frac_val: u64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().map_err(|e| format!("`{text}`: {e}"))?
        };
        Ok(DecimalRatio {
            units: int_val * denom + frac_val,
            denom,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.units == 0
    }

    /// True when the ratio is in (0, 2].
    fn valid_factor(&self) -> bool {
        self.units > 0 && self.units <= 2 * self.denom
    }

    /// `⌈n × ratio⌉` in exact integer arithmetic.
    pub fn ceil_mul(&self, n: u64) -> u64 {
        let prod = n as u128 * self.units as u128;
        prod.div_ceil(self.denom as u128) as u64
    }
}

impl std::fmt::Display for DecimalRatio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.units as f64 / self.denom as f64)
    }
}

/// Parse dollars (optionally `$`-prefixed, comma separators, ≤ 2 decimals)
/// into cents.
pub fn parse_money(text: &str) -> Result<Cents, String> {
    let cleaned: String = text
        .trim()
        .trim_start_matches('$')
        .chars()
        .filter(|&c| c != ',')
        .collect();
    let (dollars, cents_part) = match cleaned.split_once('.') {
        Some((d, c)) => (d, c),
        None => (cleaned.as_str(), ""),
    };
    if cents_part.len() > 2 {
        return Err(format!("`{text}` has sub-cent precision"));
    }
    let dollars: i64 = if dollars.is_empty() {
        0
    } else {
        dollars.parse().map_err(|e| format!("`{text}`: {e}"))?
    };
    if dollars < 0 {
        return Err(format!("`{text}` is negative"));
    }
    let cents: i64 = if cents_part.is_empty() {
        0
    } else {
        let padded = format!("{cents_part:0<2}");
        padded.parse().map_err(|e| format!("`{text}`: {e}"))?
    };
    Ok(dollars * 100 + cents)
}

/// `$6,250.00`-style rendering.
pub fn format_cents(cents: Cents) -> String {
    let sign = if cents < 0 { "-" } else { "" };
    let abs = cents.unsigned_abs();
    let dollars = abs / 100;
    let rem = abs % 100;
    let mut digits = dollars.to_string();
    let mut grouped = String::new();
    while digits.len() > 3 {
        let split = digits.len() - 3;
        grouped = format!(",{}{}", &digits[split..], grouped);
        digits.truncate(split);
    }
    format!("{sign}${digits}{grouped}.{rem:02}")
}

/// Inputs for one deployment's cost model.
#[derive(Debug, Clone, PartialEq)]
pub struct EconParams {
    pub rooms: u64,
    pub install_minutes_per_room: u64,
    pub fingerprint_minutes_per_room: u64,
    pub install_hourly_rate: Cents,
    pub fingerprint_hourly_rate: Cents,
    pub beacon_unit_price: Cents,
    pub battery_unit_price: Cents,
    pub battery_lifetime_years: f64,
    pub beacon_room_factor: DecimalRatio,
    /// Fingerprinting deployments pay a per-room survey; multilateration
    /// does not.
    pub requires_fingerprinting: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineItem {
    pub description: String,
    pub units: u64,
    pub price_per_unit: Cents,
    /// For recurring items this is the per-year amortized amount
    /// (`units × price / battery_lifetime_years`).
    pub total: Cents,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostBreakdown {
    pub approach: String,
    pub setup_items: Vec<LineItem>,
    pub recurring_items: Vec<LineItem>,
    pub setup_total: Cents,
    pub recurring_yearly_total: Cents,
}

fn labor_price_per_unit(hourly_rate: Cents, minutes: u64) -> Cents {
    // Round half up to the cent.
    let numerator = hourly_rate as i128 * minutes as i128;
    ((numerator * 2 + 60) / 120) as Cents
}

/// Build the setup and recurring cost breakdown for one deployment.
pub fn cost_model(p: &EconParams) -> Result<CostBreakdown, EconError> {
    if !p.beacon_room_factor.valid_factor() {
        return Err(EconError::Invalid(format!(
            "beacon-room factor {} outside (0, 2]",
            p.beacon_room_factor
        )));
    }
    if p.battery_lifetime_years <= 0.0 {
        return Err(EconError::Invalid(
            "battery lifetime must be positive".into(),
        ));
    }
    let beacons = p.beacon_room_factor.ceil_mul(p.rooms);
    let install_price = labor_price_per_unit(p.install_hourly_rate, p.install_minutes_per_room);
    let fingerprint_price =
        labor_price_per_unit(p.fingerprint_hourly_rate, p.fingerprint_minutes_per_room);
    let fingerprint_units = if p.requires_fingerprinting { p.rooms } else { 0 };

    let item = |description: &str, units: u64, price: Cents| LineItem {
        description: description.to_string(),
        units,
        price_per_unit: price,
        total: units as i64 * price,
    };
    let setup_items = vec![
        item("BLE Beacons", beacons, p.beacon_unit_price),
        item("Installation of BLE Beacons", beacons, install_price),
        item("kNN Fingerprinting", fingerprint_units, fingerprint_price),
    ];
    let setup_total = setup_items.iter().map(|i| i.total).sum();

    let amortized = |description: &str, units: u64, price: Cents| {
        let per_cycle = units as i64 * price;
        let total = if p.battery_lifetime_years == 1.0 {
            per_cycle
        } else {
            (per_cycle as f64 / p.battery_lifetime_years).round() as Cents
        };
        LineItem {
            description: description.to_string(),
            units,
            price_per_unit: price,
            total,
        }
    };
    // Battery replacement labor is priced like installation: same worker,
    // same time per beacon.
    let recurring_items = vec![
        amortized("Coin cell battery", beacons, p.battery_unit_price),
        amortized("Battery replacement work", beacons, install_price),
    ];
    let recurring_yearly_total = recurring_items.iter().map(|i| i.total).sum();

    Ok(CostBreakdown {
        approach: if p.requires_fingerprinting {
            "fingerprinting".to_string()
        } else {
            "multilateration".to_string()
        },
        setup_items,
        recurring_items,
        setup_total,
        recurring_yearly_total,
    })
}

/// Cumulative cost per year: `year t = setup + t × recurring`.
pub fn accumulate(b: &CostBreakdown, years: u32) -> Vec<Cents> {
    (1..=years as i64)
        .map(|t| b.setup_total + t * b.recurring_yearly_total)
        .collect()
}

/// One year of the head-to-head comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct YearComparison {
    pub year: u32,
    pub cumulative_a: Cents,
    pub cumulative_b: Cents,
    /// `(b − a) / b`: how much cheaper `a` runs relative to `b`.
    pub relative_advantage_a: f64,
}

/// Comparison of two breakdowns over a horizon. The multi-year savings are
/// reported under both baselines because the two conventions disagree
/// materially; pick one explicitly when quoting a single figure.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub approach_a: String,
    pub approach_b: String,
    pub per_year: Vec<YearComparison>,
    /// `(setup_a − setup_b) / setup_a`: positive when `b` is cheaper to set
    /// up.
    pub setup_advantage_b: f64,
    /// Smallest year where `a`'s cumulative cost is at or below `b`'s.
    pub breakeven_year: Option<u32>,
    /// Horizon savings of `a`, baseline `b`: `(b − a) / b`.
    pub horizon_savings_vs_b: f64,
    /// Horizon savings of `a`, baseline `a`: `(b − a) / a`.
    pub horizon_savings_vs_a: f64,
    pub horizon: u32,
}

/// Compare breakdown `a` against `b` over `horizon` years.
pub fn compare(a: &CostBreakdown, b: &CostBreakdown, horizon: u32) -> ComparisonReport {
    assert!(horizon >= 1, "horizon must be at least one year");
    let cum_a = accumulate(a, horizon);
    let cum_b = accumulate(b, horizon);
    let per_year: Vec<YearComparison> = (0..horizon as usize)
        .map(|i| YearComparison {
            year: i as u32 + 1,
            cumulative_a: cum_a[i],
            cumulative_b: cum_b[i],
            relative_advantage_a: (cum_b[i] - cum_a[i]) as f64 / cum_b[i] as f64,
        })
        .collect();
    let breakeven_year = per_year
        .iter()
        .find(|y| y.cumulative_a <= y.cumulative_b)
        .map(|y| y.year);
    let last_a = cum_a[horizon as usize - 1];
    let last_b = cum_b[horizon as usize - 1];
    ComparisonReport {
        approach_a: a.approach.clone(),
        approach_b: b.approach.clone(),
        per_year,
        setup_advantage_b: (a.setup_total - b.setup_total) as f64 / a.setup_total as f64,
        breakeven_year,
        horizon_savings_vs_b: (last_b - last_a) as f64 / last_b as f64,
        horizon_savings_vs_a: (last_b - last_a) as f64 / last_a as f64,
        horizon,
    }
}

/// The shared parameter table covering both deployments.
#[derive(Debug, Clone, PartialEq)]
pub struct EconTable {
    pub rooms: u64,
    pub install_minutes_per_room: u64,
    pub fingerprint_minutes_per_room: u64,
    pub install_hourly_rate: Cents,
    pub fingerprint_hourly_rate: Cents,
    pub beacon_unit_price: Cents,
    pub battery_unit_price: Cents,
    pub battery_lifetime_years: f64,
    pub factor_knn: DecimalRatio,
    pub factor_multi: DecimalRatio,
}

impl Default for EconTable {
    fn default() -> Self {
        EconTable {
            rooms: 500,
            install_minutes_per_room: 15,
            fingerprint_minutes_per_room: 15,
            install_hourly_rate: 30_00,
            fingerprint_hourly_rate: 30_00,
            beacon_unit_price: 5_00,
            battery_unit_price: 2_00,
            battery_lifetime_years: 1.0,
            factor_knn: DecimalRatio::parse("0.4").unwrap(),
            factor_multi: DecimalRatio::parse("0.8").unwrap(),
        }
    }
}

impl EconTable {
    /// Parse a `key = value` parameter file; missing keys keep defaults.
    pub fn parse(text: &str) -> Result<EconTable, EconError> {
        let mut table = EconTable::default();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(EconError::Parse {
                line: lineno,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let err = |msg: String| EconError::Parse { line: lineno, msg };
            match key {
                "rooms" => table.rooms = value.parse().map_err(|e| err(format!("{e}")))?,
                "installation-minutes-per-room" => {
                    table.install_minutes_per_room =
                        value.parse().map_err(|e| err(format!("{e}")))?
                }
                "fingerprinting-minutes-per-room" => {
                    table.fingerprint_minutes_per_room =
                        value.parse().map_err(|e| err(format!("{e}")))?
                }
                "installation-hourly-rate" => {
                    table.install_hourly_rate = parse_money(value).map_err(err)?
                }
                "fingerprinting-hourly-rate" => {
                    table.fingerprint_hourly_rate = parse_money(value).map_err(err)?
                }
                "beacon-unit-price" => table.beacon_unit_price = parse_money(value).map_err(err)?,
                "battery-unit-price" => {
                    table.battery_unit_price = parse_money(value).map_err(err)?
                }
                "battery-lifetime-years" => {
                    table.battery_lifetime_years =
                        value.parse().map_err(|e| err(format!("{e}")))?
                }
                "beacon-room-factor-knn" => {
                    table.factor_knn = DecimalRatio::parse(value).map_err(err)?
                }
                "beacon-room-factor-multi" => {
                    table.factor_multi = DecimalRatio::parse(value).map_err(err)?
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<EconTable, EconError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn fingerprinting_params(&self) -> EconParams {
        EconParams {
            rooms: self.rooms,
            install_minutes_per_room: self.install_minutes_per_room,
            fingerprint_minutes_per_room: self.fingerprint_minutes_per_room,
            install_hourly_rate: self.install_hourly_rate,
            fingerprint_hourly_rate: self.fingerprint_hourly_rate,
            beacon_unit_price: self.beacon_unit_price,
            battery_unit_price: self.battery_unit_price,
            battery_lifetime_years: self.battery_lifetime_years,
            beacon_room_factor: self.factor_knn,
            requires_fingerprinting: true,
        }
    }

    pub fn multilateration_params(&self) -> EconParams {
        EconParams {
            beacon_room_factor: self.factor_multi,
            requires_fingerprinting: false,
            ..self.fingerprinting_params()
        }
    }
}

/// Plain-text table for one breakdown, matching the `$x,xxx.00` rendering.
pub fn render_breakdown(b: &CostBreakdown) -> String {
    let mut out = String::new();
    out.push_str(&format!("{}\n", b.approach));
    out.push_str("description,units,price_per_unit,total\n");
    for item in &b.setup_items {
        out.push_str(&format!(
            "{},{},{},{}\n",
            item.description,
            item.units,
            format_cents(item.price_per_unit),
            format_cents(item.total)
        ));
    }
    out.push_str(&format!("Setup Costs,,,{}\n", format_cents(b.setup_total)));
    for item in &b.recurring_items {
        out.push_str(&format!(
            "{},{},{},{}\n",
            item.description,
            item.units,
            format_cents(item.price_per_unit),
            format_cents(item.total)
        ));
    }
    out.push_str(&format!(
        "Recurring Costs (Yearly),,,{}\n",
        format_cents(b.recurring_yearly_total)
    ));
    out
}

/// Plain-text comparison: per-year cumulative costs, breakeven and the two
/// savings conventions, explicitly labeled because they differ.
pub fn render_comparison(report: &ComparisonReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "comparison: {} (a) vs {} (b), horizon {} years\n",
        report.approach_a, report.approach_b, report.horizon
    ));
    out.push_str("year,cumulative_a,cumulative_b,advantage_a_pct\n");
    for y in &report.per_year {
        out.push_str(&format!(
            "{},{},{},{:.1}%\n",
            y.year,
            format_cents(y.cumulative_a),
            format_cents(y.cumulative_b),
            y.relative_advantage_a * 100.0
        ));
    }
    out.push_str(&format!(
        "setup only: b cheaper by {:.1}%\n",
        report.setup_advantage_b * 100.0
    ));
    match report.breakeven_year {
        Some(year) => out.push_str(&format!("breakeven: a recovers setup within year {year}\n")),
        None => out.push_str("breakeven: not within horizon\n"),
    }
    out.push_str(&format!(
        "{}-year savings of a, baseline b ((b-a)/b): {:.1}%\n",
        report.horizon, report.horizon_savings_vs_b * 100.0
    ));
    out.push_str(&format!(
        "{}-year savings of a, baseline a ((b-a)/a): {:.1}%\n",
        report.horizon, report.horizon_savings_vs_a * 100.0
    ));
    out.push_str(
        "note: the two conventions disagree; any single quoted figure must name its baseline\n",
    );
    out
}
