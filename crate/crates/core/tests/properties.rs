use std::collections::HashSet;

use proptest::prelude::*;
use svakit::annotate::SvadText;
use svakit::dataset::{dedup, stratified_split, BenchFraction, DatasetRecord};
use svakit::equiv::{check_relation, verdict, BoundConfig, Trace};
use svakit::sva::{analyze, normalize, parse, AssertionUnit};

fn boolean() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["a", "b", "c"]).prop_map(String::from),
        prop::sample::select(vec!["$rose(a)", "$fell(b)", "$stable(c)", "$past(a)", "$past(b, 2)"])
            .prop_map(String::from),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|x| format!("!({x})")),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| format!("({x} && {y})")),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| format!("({x} || {y})")),
            (inner.clone(), inner).prop_map(|(x, y)| format!("({x} == {y})")),
        ]
    })
}

fn sequence() -> impl Strategy<Value = String> {
    boolean().prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), 0u32..3, inner.clone()).prop_map(|(x, n, y)| format!("({x} ##{n} {y})")),
            (inner.clone(), 0u32..2, 1u32..3, inner.clone())
                .prop_map(|(x, m, w, y)| format!("({x} ##[{m}:{}] {y})", m + w)),
            (inner.clone(), 1u32..3).prop_map(|(x, n)| format!("({x})[*{n}]")),
            (boolean(), 1u32..3).prop_map(|(x, n)| format!("({x})[->{n}]")),
            (boolean(), 1u32..3).prop_map(|(x, n)| format!("({x})[={n}]")),
            (1u32..3, inner).prop_map(|(n, x)| format!("(##{n} {x})")),
        ]
    })
}

fn property() -> impl Strategy<Value = String> {
    sequence().prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (sequence(), inner.clone()).prop_map(|(s, p)| format!("({s} |-> {p})")),
            (sequence(), inner.clone()).prop_map(|(s, p)| format!("({s} |=> {p})")),
            inner.clone().prop_map(|p| format!("(not {p})")),
            (inner.clone(), inner.clone()).prop_map(|(p, q)| format!("({p} and {q})")),
            (inner.clone(), inner.clone()).prop_map(|(p, q)| format!("({p} or {q})")),
            (inner.clone(), inner).prop_map(|(p, q)| format!("({p} until {q})")),
        ]
    })
}

fn header() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("@(posedge clk) ".to_string()),
        Just("@(negedge clk) ".to_string()),
        Just("@(posedge clk) disable iff (rst) ".to_string()),
    ]
}

fn unit(text: &str) -> AssertionUnit {
    parse(text).unwrap_or_else(|d| panic!("{text}: {}", d[0]))
}

const SMALL: BoundConfig = BoundConfig {
    length: None,
    cap: 14,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normalize_is_a_fixed_point(h in header(), p in property()) {
        let first = unit(&format!("{h}{p}"));
        let canon = normalize(&first);
        let second = unit(&canon);
        prop_assert_eq!(normalize(&second), canon.clone());
        prop_assert_eq!(analyze(&first), analyze(&second));
    }

    #[test]
    fn wrapping_in_an_implication_adds_one_level(s in sequence()) {
        let plain = analyze(&unit(&format!("@(posedge clk) {s}"))).depth;
        let wrapped = analyze(&unit(&format!("@(posedge clk) ({s}) |-> ({s})"))).depth;
        prop_assert_eq!(wrapped, plain + 1);
    }

    #[test]
    fn strong_verdict_implies_weak(p in property(), bits in prop::collection::vec(any::<bool>(), 15)) {
        let u = unit(&format!("@(posedge clk) {p}"));
        let trace = Trace::from_waves(&[
            ("a", &bits[0..5].iter().map(|&b| u8::from(b)).collect::<Vec<_>>()),
            ("b", &bits[5..10].iter().map(|&b| u8::from(b)).collect::<Vec<_>>()),
            ("c", &bits[10..15].iter().map(|&b| u8::from(b)).collect::<Vec<_>>()),
        ]);
        for start in 0..5 {
            let v = verdict(&u, &trace, start).unwrap();
            prop_assert!(!v.holds_strong || v.holds_weak, "start {}", start);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_property_is_equivalent_to_itself(h in header(), p in property()) {
        let u = unit(&format!("{h}{p}"));
        if let Ok(r) = check_relation(&u, &u, &SMALL) {
            prop_assert_eq!(r.relation, svakit::equiv::Relation::Equivalent);
        }
    }

    #[test]
    fn swapping_arguments_swaps_the_relation(p in property(), q in property()) {
        let (x, y) = (unit(&format!("@(posedge clk) {p}")), unit(&format!("@(posedge clk) {q}")));
        match (check_relation(&x, &y, &SMALL), check_relation(&y, &x, &SMALL)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.relation.swapped(), b.relation),
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn dedup_is_idempotent(texts in prop::collection::vec((header(), sequence()), 0..30)) {
        let mut records: Vec<DatasetRecord> = texts
            .iter()
            .map(|(h, s)| DatasetRecord::new(&format!("{h}{s}"), SvadText::new("d")).unwrap())
            .collect();
        records.extend(records.clone());
        let once = dedup(records);
        let keys: HashSet<_> = once.iter().map(|r| r.key()).collect();
        prop_assert_eq!(keys.len(), once.len());
        prop_assert_eq!(dedup(once.clone()), once);
    }

    #[test]
    fn split_is_a_partition(
        texts in prop::collection::vec(property(), 0..60),
        num in 1u64..10,
        seed in any::<u64>(),
    ) {
        let records = dedup(
            texts
                .iter()
                .map(|p| DatasetRecord::new(&format!("@(posedge clk) {p}"), SvadText::new("d")).unwrap())
                .collect(),
        );
        let fraction = BenchFraction::new(num, 10).unwrap();
        let (train, bench) = stratified_split(&records, fraction, seed);
        prop_assert_eq!(train.len() + bench.len(), records.len());
        prop_assert_eq!(bench.len(), fraction.of(records.len()));
        let mut ids: Vec<_> = train.iter().chain(&bench).map(|r| r.id.clone()).collect();
        ids.sort();
        let mut want: Vec<_> = records.iter().map(|r| r.id.clone()).collect();
        want.sort();
        prop_assert_eq!(ids, want);
        prop_assert_eq!(stratified_split(&records, fraction, seed), (train, bench));
    }
}

