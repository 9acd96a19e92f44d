//! Deterministic synthetic datasets for the examples, the bundled fixtures,
//! and the test suite. Same seed, same dataset, digest for digest.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::dataset::{Cell, Column, Dataset, Role, ValueType};
use crate::remediate::apply::uniform_index;

fn uniform_f64(rng: &mut ChaCha8Rng) -> f64 {
    // 53 random mantissa bits; uniform on [0, 1).
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A 500-row credit-style dataset that trips every quality dimension at
/// least a little: missing ages and cities, a few non-numeric zip codes,
/// income outliers, one perfectly correlated score pair, a roughly 90/10
/// target driven by a hidden feature score, a mild income gap across `sex`,
/// and a block of duplicated rows.
pub fn readiness_demo(seed: u64) -> Dataset {
    let rows = 500;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut id = Vec::with_capacity(rows);
    let mut age = Vec::with_capacity(rows);
    let mut sex = Vec::with_capacity(rows);
    let mut city = Vec::with_capacity(rows);
    let mut zip = Vec::with_capacity(rows);
    let mut income = Vec::with_capacity(rows);
    let mut score_a = Vec::with_capacity(rows);
    let mut score_b = Vec::with_capacity(rows);
    let mut visits = Vec::with_capacity(rows);
    let mut approved = Vec::with_capacity(rows);
    let mut risk = Vec::with_capacity(rows);

    const CITIES: [&str; 6] = ["Aachen", "Berlin", "Chemnitz", "Dresden", "Erfurt", "Flensburg"];

    for i in 0..rows {
        id.push(Cell::Int(100_000 + i as i64));

        let age_value = if uniform_f64(&mut rng) < 0.08 {
            None
        } else {
            Some(18 + uniform_index(&mut rng, 52) as i64)
        };
        age.push(age_value.map_or(Cell::Missing, Cell::Int));

        let is_female = uniform_f64(&mut rng) < 0.5;
        sex.push(Cell::Text(if is_female { "f" } else { "m" }.to_string()));

        if uniform_f64(&mut rng) < 0.05 {
            city.push(Cell::Missing);
        } else {
            city.push(Cell::Text(
                CITIES[uniform_index(&mut rng, CITIES.len())].to_string(),
            ));
        }

        if uniform_f64(&mut rng) < 0.03 {
            // Unparseable token in an otherwise integer column.
            zip.push(Cell::Text("unknown".to_string()));
        } else {
            zip.push(Cell::Int(10_000 + uniform_index(&mut rng, 89_999) as i64));
        }

        // A small structural income gap: the approval rule below is the
        // same for everyone, but the world it scores is not.
        let base_income =
            1_800.0 + 3_500.0 * uniform_f64(&mut rng) + if is_female { 0.0 } else { 150.0 };
        let income_value = if uniform_f64(&mut rng) < 0.02 {
            base_income * 40.0
        } else {
            base_income
        };
        income.push(Cell::Real(income_value));

        let a = (uniform_index(&mut rng, 1000) as f64) / 8.0;
        score_a.push(Cell::Real(a));
        score_b.push(Cell::Real(2.0 * a));

        let visits_value = uniform_index(&mut rng, 40) as i64;
        visits.push(Cell::Int(visits_value));

        // Hidden creditworthiness: mostly income and score, a little recency
        // and age, a dash of noise. Approvals threshold this below.
        let norm_income = ((income_value - 1_800.0) / 3_500.0).clamp(0.0, 1.5);
        let norm_age = age_value.map_or(0.5, |v| (v - 18) as f64 / 51.0);
        risk.push(
            0.45 * norm_income
                + 0.30 * (a / 125.0)
                + 0.15 * (1.0 - visits_value as f64 / 39.0)
                + 0.10 * norm_age
                + 0.05 * (uniform_f64(&mut rng) - 0.5),
        );
    }

    // Deny the lowest-risk ~8%, then flip 2% of labels: the target lands
    // near 90/10 and mostly follows the features, but not perfectly.
    let mut sorted_risk = risk.clone();
    sorted_risk.sort_unstable_by(f64::total_cmp);
    let threshold = crate::stats::quantile_type7(&sorted_risk, 0.08);
    for r in 0..rows {
        let mut yes = risk[r] > threshold;
        if uniform_f64(&mut rng) < 0.02 {
            yes = !yes;
        }
        approved.push(Cell::Text(if yes { "yes" } else { "no" }.to_string()));
    }

    // Copy twenty early rows wholesale over twenty late rows: the dataset
    // then carries exact duplicates, id included, as re-ingested records do.
    for d in 0..20 {
        let src = 3 * d;
        let dst = 400 + 5 * (d % 20);
        age[dst] = age[src].clone();
        sex[dst] = sex[src].clone();
        city[dst] = city[src].clone();
        zip[dst] = zip[src].clone();
        income[dst] = income[src].clone();
        score_a[dst] = score_a[src].clone();
        score_b[dst] = score_b[src].clone();
        visits[dst] = visits[src].clone();
        approved[dst] = approved[src].clone();
        id[dst] = id[src].clone();
    }

    Dataset::from_columns(
        vec![
            Column::new("id", ValueType::Integer, Role::Identifier, id),
            Column::new("age", ValueType::Integer, Role::Feature, age),
            Column::new("sex", ValueType::Text, Role::Protected, sex).with_forced_categorical(),
            Column::new("city", ValueType::Text, Role::Feature, city),
            Column::new("zip", ValueType::Integer, Role::Feature, zip),
            Column::new("income_eur", ValueType::Real, Role::Feature, income),
            Column::new("score_a", ValueType::Real, Role::Feature, score_a),
            Column::new("score_b", ValueType::Real, Role::Feature, score_b),
            Column::new("visits", ValueType::Integer, Role::Feature, visits),
            Column::new("approved", ValueType::Text, Role::Target, approved)
                .with_forced_categorical(),
        ],
        "synthetic://readiness_demo",
        "baseline",
    )
    .expect("generator invariants hold")
}

/// An arbitrarily long census-style dataset for scale and timing tests:
/// fourteen demographic and work features (six of them numeric) and a
/// binary income target, with light missingness, a redundant education
/// encoding, and a protected `sex` column.
pub fn census_demo(rows: usize, seed: u64) -> Dataset {
    assert!(rows >= 10, "census_demo needs at least 10 rows");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    const WORKCLASS: [&str; 5] = [
        "Private",
        "Self-emp",
        "Local-gov",
        "State-gov",
        "Federal-gov",
    ];
    const EDUCATION: [(&str, i64); 7] = [
        ("11th", 7),
        ("HS-grad", 9),
        ("Some-college", 10),
        ("Assoc-voc", 11),
        ("Bachelors", 13),
        ("Masters", 14),
        ("Doctorate", 16),
    ];
    const MARITAL: [&str; 4] = [
        "Married-civ-spouse",
        "Never-married",
        "Divorced",
        "Widowed",
    ];
    const OCCUPATION: [&str; 7] = [
        "Craft-repair",
        "Exec-managerial",
        "Prof-specialty",
        "Sales",
        "Adm-clerical",
        "Other-service",
        "Machine-op-inspct",
    ];
    const RELATIONSHIP: [&str; 5] = ["Husband", "Not-in-family", "Own-child", "Unmarried", "Wife"];
    const RACE: [&str; 5] = [
        "White",
        "Black",
        "Asian-Pac-Islander",
        "Amer-Indian-Eskimo",
        "Other",
    ];
    const COUNTRY: [&str; 4] = ["Mexico", "Philippines", "Germany", "Canada"];

    let mut cols: Vec<Vec<Cell>> = (0..15).map(|_| Vec::with_capacity(rows)).collect();
    for _ in 0..rows {
        let age = 17 + uniform_index(&mut rng, 57) as i64;
        cols[0].push(Cell::Int(age));
        cols[1].push(if uniform_f64(&mut rng) < 0.02 {
            Cell::Missing
        } else {
            Cell::Text(WORKCLASS[uniform_index(&mut rng, WORKCLASS.len())].to_string())
        });
        cols[2].push(Cell::Int(20_000 + uniform_index(&mut rng, 480_000) as i64));
        // education_num restates education numerically, as census extracts do.
        let (education, education_num) = EDUCATION[uniform_index(&mut rng, EDUCATION.len())];
        cols[3].push(Cell::Text(education.to_string()));
        cols[4].push(Cell::Int(education_num));
        cols[5].push(Cell::Text(
            MARITAL[uniform_index(&mut rng, MARITAL.len())].to_string(),
        ));
        cols[6].push(if uniform_f64(&mut rng) < 0.03 {
            Cell::Missing
        } else {
            Cell::Text(OCCUPATION[uniform_index(&mut rng, OCCUPATION.len())].to_string())
        });
        cols[7].push(Cell::Text(
            RELATIONSHIP[uniform_index(&mut rng, RELATIONSHIP.len())].to_string(),
        ));
        cols[8].push(Cell::Text(
            RACE[uniform_index(&mut rng, RACE.len())].to_string(),
        ));
        cols[9].push(Cell::Text(
            if uniform_f64(&mut rng) < 2.0 / 3.0 {
                "Male"
            } else {
                "Female"
            }
            .to_string(),
        ));
        let gain = if uniform_f64(&mut rng) < 0.1 {
            1_000 + uniform_index(&mut rng, 20_000) as i64
        } else {
            0
        };
        cols[10].push(Cell::Int(gain));
        cols[11].push(Cell::Int(if uniform_f64(&mut rng) < 0.05 {
            500 + uniform_index(&mut rng, 3_000) as i64
        } else {
            0
        }));
        let hours = 20 + uniform_index(&mut rng, 60) as i64;
        cols[12].push(Cell::Int(hours));
        cols[13].push(if uniform_f64(&mut rng) < 0.01 {
            Cell::Missing
        } else if uniform_f64(&mut rng) < 0.9 {
            Cell::Text("United-States".to_string())
        } else {
            Cell::Text(COUNTRY[uniform_index(&mut rng, COUNTRY.len())].to_string())
        });
        // Income follows age, education, hours, and capital gains, with an
        // 8% label flip.
        let signal = (age as f64 - 17.0) / 56.0
            + education_num as f64 / 8.0
            + hours as f64 / 40.0
            + if gain > 0 { 1.0 } else { 0.0 };
        let mut high = signal > 3.75;
        if uniform_f64(&mut rng) < 0.08 {
            high = !high;
        }
        cols[14].push(Cell::Text(if high { ">50K" } else { "<=50K" }.to_string()));
    }

    let spec: [(&str, ValueType, Role); 15] = [
        ("age", ValueType::Integer, Role::Feature),
        ("workclass", ValueType::Text, Role::Feature),
        ("fnlwgt", ValueType::Integer, Role::Feature),
        ("education", ValueType::Text, Role::Feature),
        ("education_num", ValueType::Integer, Role::Feature),
        ("marital_status", ValueType::Text, Role::Feature),
        ("occupation", ValueType::Text, Role::Feature),
        ("relationship", ValueType::Text, Role::Feature),
        ("race", ValueType::Text, Role::Feature),
        ("sex", ValueType::Text, Role::Protected),
        ("capital_gain", ValueType::Integer, Role::Feature),
        ("capital_loss", ValueType::Integer, Role::Feature),
        ("hours_per_week", ValueType::Integer, Role::Feature),
        ("native_country", ValueType::Text, Role::Feature),
        ("income", ValueType::Text, Role::Target),
    ];
    let columns: Vec<Column> = cols
        .into_iter()
        .zip(spec)
        .map(|(cells, (name, value_type, role))| {
            let column = Column::new(name, value_type, role, cells);
            if role == Role::Target || role == Role::Protected {
                column.with_forced_categorical()
            } else {
                column
            }
        })
        .collect();

    Dataset::from_columns(columns, "synthetic://census_demo", "baseline")
        .expect("generator invariants hold")
}
