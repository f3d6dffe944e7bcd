use proptest::prelude::*;
use valuegraph::datamodel::*;
use valuegraph::scoring::*;

fn catalog(n_values: usize, per_value: usize) -> Catalog {
    let values: Vec<String> = (0..n_values)
        .map(|v| {
            let qs: Vec<String> = (0..per_value)
                .map(|q| {
                    format!(
                        r#"{{"id":"v{v}q{q}","text":"question {q}","polarity":{}}}"#,
                        if q % 3 == 0 { -1 } else { 1 }
                    )
                })
                .collect();
            format!(r#"{{"id":"v{v}","name":"V{v}","definition":"d","questions":[{}]}}"#, qs.join(","))
        })
        .collect();
    Catalog::from_json(&format!(r#"{{"values":[{}]}}"#, values.join(","))).unwrap()
}

fn roles(n: usize) -> RoleSet {
    let mut out = vec![Role { id: "r0".into(), attributes: Default::default(), is_baseline: true }];
    for i in 1..n {
        let mut attributes = indexmap::IndexMap::new();
        attributes.insert("Job".to_string(), format!("job {i}"));
        out.push(Role { id: format!("r{i}"), attributes, is_baseline: false });
    }
    RoleSet::new(out).unwrap()
}

fn label(i: usize) -> TernaryLabel {
    [TernaryLabel::Yes, TernaryLabel::No, TernaryLabel::Unsure][i % 3]
}

proptest! {
    #[test]
    fn classification_ignores_case(s in "[ a-zA-Z,.!']{0,30}") {
        prop_assert_eq!(classify_answer(&s), classify_answer(&s.to_uppercase()));
        prop_assert_eq!(classify_answer(&s), classify_answer(&s.to_lowercase()));
    }

    #[test]
    fn yes_prefix_wins(rest in "[ a-z]{0,20}") {
        prop_assert_eq!(classify_answer(&format!("Yes{rest}")), Classification::Label(TernaryLabel::Yes));
        prop_assert_eq!(classify_answer(&format!("I am unable{rest}")), Classification::Label(TernaryLabel::Unsure));
    }

    #[test]
    fn matrix_ignores_record_order(labels in prop::collection::vec(0usize..3, 24), rotate in 0usize..24) {
        let cat = catalog(2, 4);
        let conds = [SteeringCondition::role("r0"), SteeringCondition::role("r1"), SteeringCondition::sae("r0", 1, 12, 100.0)];
        let mut records = Vec::new();
        let mut i = 0;
        for c in &conds {
            for q in cat.questions() {
                records.push(ResponseRecord {
                    condition: c.clone(),
                    question_id: q.id.clone(),
                    thought: String::new(),
                    answer: String::new(),
                    label: Some(label(labels[i])),
                    thought_label: None,
                });
                i += 1;
            }
        }
        let a = build_matrix(&records, &cat, None, QuestionScope::All).unwrap();
        records.rotate_left(rotate);
        let b = build_matrix(&records, &cat, None, QuestionScope::All).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
        for r in 0..a.n_rows() {
            for c in 0..a.columns().len() {
                let o = a.cell(r, c).unwrap();
                prop_assert_eq!(o.count(), 4);
                prop_assert!(o.sum().abs() <= 4);
            }
        }
    }

    #[test]
    fn split_partitions(seed in any::<u64>(), n_roles in 2usize..40, per_value in 4usize..15) {
        let cat = catalog(3, per_value);
        let rs = roles(n_roles);
        let s = split_dataset(&cat, &rs, seed).unwrap();
        prop_assert_eq!(s.train_roles.len() + s.test_roles.len(), n_roles);
        prop_assert!(s.train_roles.iter().all(|r| !s.test_roles.contains(r)));
        prop_assert!(s.train_roles.contains(&"r0".to_string()));
        for v in cat.values() {
            let q = &s.questions[&v.id];
            prop_assert_eq!(q.train.len() + q.test.len(), per_value);
            prop_assert_eq!(q.test.len(), round_fraction(per_value, 30));
            let dyad = s.dyad_sample("role/r1@default", &v.id).unwrap();
            prop_assert_eq!(dyad.len(), round_fraction(q.train.len(), 40));
            prop_assert!(dyad.iter().all(|d| q.train.contains(d)));
        }
        prop_assert_eq!(split_dataset(&cat, &rs, seed).unwrap(), s);
    }
}

#[test]
fn judgment_examples_need_the_judge_or_match() {
    assert_eq!(classify_answer("for sure"), Classification::NeedsJudge);
    assert_eq!(classify_answer("the answer is no"), Classification::NeedsJudge);
    assert_eq!(
        classify_answer("i cannot provide a response based on personal opinions"),
        Classification::Label(TernaryLabel::Unsure)
    );
    assert_eq!(classify_answer("It depends entirely on context."), Classification::NeedsJudge);
}

#[test]
fn response_file_round_trip() {
    let cat = catalog(1, 4);
    let records: Vec<ResponseRecord> = cat
        .questions()
        .enumerate()
        .map(|(i, q)| ResponseRecord {
            condition: SteeringCondition::instruction("r0", "v0", Direction::Inclined),
            question_id: q.id.clone(),
            thought: format!("thought {i}"),
            answer: "Yes".into(),
            label: Some(label(i)),
            thought_label: None,
        })
        .collect();
    let text = responses_to_jsonl(&records);
    assert_eq!(parse_responses(&text).unwrap(), records);
    validate_responses(&records, &cat, Some(&roles(2))).unwrap();
}
