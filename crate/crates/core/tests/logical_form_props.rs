//! Properties of the logical-form AST: round-trips through both surface
//! syntaxes, masking, placeholder numbering and normalization.

use proptest::prelude::*;

use dblpqa::logical_form::{
    mask_entities, parse, parse_sparql, Filter, FormKind, GroupPattern, Literal, LogicalForm, Operator,
    OrderExpr, OrderKey, PatternElement, ProjectionItem, SortDirection, Term, Triple, Vocabulary,
};
use dblpqa::query::normalize;

const RELATIONS: [&str; 6] = [
    "<authoredBy>",
    "<publishedIn>",
    "<yearOfPublication>",
    "<title>",
    "<primaryAffiliation>",
    "<numberOfCreators>",
];

fn variable() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("?firstanswer".to_string()),
        Just("?secondanswer".to_string()),
        "[a-z]{1,4}".prop_map(|s| format!("?{s}")),
    ]
}

fn mention() -> impl Strategy<Value = String> {
    "[a-z]{1,6}".prop_map(|s| format!("E_{s}"))
}

fn literal() -> impl Strategy<Value = Literal> {
    prop_oneof![
        (0i64..3000).prop_map(Literal::integer),
        ("[A-Za-z]{1,8}", prop::option::of(Just("@en".to_string())))
            .prop_map(|(value, suffix)| Literal::String { value, suffix }),
    ]
}

fn ground_term() -> impl Strategy<Value = Term> {
    prop_oneof![
        variable().prop_map(Term::Variable),
        "[a-z]{1,5}".prop_map(|s| Term::Uri(format!("https://dblp.org/rec/x/{s}"))),
        literal().prop_map(Term::Literal),
    ]
}

fn term(mentions: bool) -> BoxedStrategy<Term> {
    if mentions {
        prop_oneof![
            3 => ground_term(),
            2 => mention().prop_map(Term::Mention),
        ]
        .boxed()
    } else {
        ground_term().boxed()
    }
}

fn triple(mentions: bool) -> impl Strategy<Value = PatternElement> {
    (term(mentions), prop::sample::select(&RELATIONS[..]), term(mentions)).prop_map(|(subject, r, object)| {
        PatternElement::Triple(Triple {
            subject,
            relation: r.to_string(),
            object,
        })
    })
}

fn compare(mentions: bool) -> impl Strategy<Value = PatternElement> {
    (term(mentions), prop::sample::select(&Operator::ALL[..]), term(mentions))
        .prop_map(|(lhs, op, rhs)| PatternElement::Filter(Filter::Compare { lhs, op, rhs }))
}

fn group(mentions: bool) -> impl Strategy<Value = GroupPattern> {
    let leaf = prop_oneof![4 => triple(mentions), 1 => compare(mentions)];
    let element = leaf.prop_recursive(2, 12, 3, move |inner| {
        let nested = prop::collection::vec(inner, 1..3).prop_map(|elements| GroupPattern { elements });
        prop_oneof![
            prop::collection::vec(nested.clone(), 1..3).prop_map(|branches| PatternElement::Union { branches }),
            nested.prop_map(|pattern| PatternElement::Filter(Filter::NotExists { pattern })),
        ]
    });
    prop::collection::vec(element, 1..5).prop_map(|elements| GroupPattern { elements })
}

fn projection() -> impl Strategy<Value = ProjectionItem> {
    prop_oneof![
        3 => variable().prop_map(|name| ProjectionItem::Variable { name }),
        1 => (any::<bool>(), variable(), variable())
            .prop_map(|(distinct, variable, alias)| ProjectionItem::Count { distinct, variable, alias }),
    ]
}

fn order_key() -> impl Strategy<Value = OrderKey> {
    let expr = prop_oneof![
        variable().prop_map(|name| OrderExpr::Variable { name }),
        (any::<bool>(), variable()).prop_map(|(distinct, variable)| OrderExpr::Count { distinct, variable }),
    ];
    let direction = prop::option::of(prop_oneof![Just(SortDirection::Asc), Just(SortDirection::Desc)]);
    (direction, expr).prop_filter_map("a bare key must be a variable", |(direction, expr)| {
        match (&direction, &expr) {
            (None, OrderExpr::Count { .. }) => None,
            _ => Some(OrderKey { direction, expr }),
        }
    })
}

/// Projected variables must occur in a pattern; prepend one triple each.
fn bind_projection(projection: &[ProjectionItem], body: &mut GroupPattern) {
    for item in projection.iter().rev() {
        let var = match item {
            ProjectionItem::Variable { name } => name,
            ProjectionItem::Count { variable, .. } => variable,
        };
        body.elements.insert(
            0,
            PatternElement::Triple(Triple {
                subject: Term::Variable(var.clone()),
                relation: "<authoredBy>".to_string(),
                object: Term::Uri("https://dblp.org/pid/00/1".to_string()),
            }),
        );
    }
}

fn form(mentions: bool) -> impl Strategy<Value = LogicalForm> {
    let select = (
        any::<bool>(),
        prop::collection::vec(projection(), 1..4),
        group(mentions),
        prop::collection::vec(variable(), 0..2),
        prop::collection::vec(order_key(), 0..2),
        prop::option::of(1u64..100),
    )
        .prop_map(|(distinct, projection, mut body, group_by, order_by, limit)| {
            bind_projection(&projection, &mut body);
            LogicalForm {
                kind: FormKind::Select,
                distinct,
                projection,
                body,
                group_by,
                order_by,
                limit,
            }
        });
    let ask = group(mentions).prop_map(LogicalForm::ask);
    prop_oneof![4 => select, 1 => ask]
}

fn vocab() -> Vocabulary {
    Vocabulary::dblp()
}

fn count_mention_terms(form: &LogicalForm) -> usize {
    let mut n = 0;
    form.for_each_term(|t, _| n += usize::from(matches!(t, Term::Mention(_))));
    n
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn logical_text_round_trips(lf in form(true)) {
        let text = lf.serialize();
        let parsed = parse(&text, &vocab()).map_err(|e| TestCaseError::fail(format!("{e}: {text}")))?;
        prop_assert_eq!(parsed, lf);
    }

    #[test]
    fn serialized_tokens_are_closed_over_the_vocabulary(lf in form(true)) {
        let v = vocab();
        for token in lf.tokens() {
            let known = v.classify(&token).is_some()
                || token.starts_with('?')
                || token.parse::<u64>().is_ok()
                || token.starts_with('"')
                || token.starts_with("<https://")
                || token.starts_with("E_");
            prop_assert!(known, "unclassified token {}", token);
        }
    }

    #[test]
    fn sparql_text_round_trips(lf in form(false)) {
        let v = vocab();
        let text = lf.to_sparql(&v).expect("ground forms render");
        let parsed = parse_sparql(&text, &v).map_err(|e| TestCaseError::fail(format!("{e}: {text}")))?;
        prop_assert_eq!(parsed, lf);
    }

    #[test]
    fn masking_is_idempotent(lf in form(true)) {
        let v = vocab();
        let (once, _) = mask_entities(&lf, &v);
        let (twice, again) = mask_entities(once.as_form(), &v);
        prop_assert_eq!(&once, &twice);
        prop_assert!(again.is_empty());
    }

    #[test]
    fn placeholders_are_dense_and_complete(lf in form(true)) {
        let v = vocab();
        let (masked, mentions) = mask_entities(&lf, &v);
        prop_assert_eq!(count_mention_terms(masked.as_form()), 0);
        let mut indices = masked.as_form().placeholders();
        indices.sort_unstable();
        indices.dedup();
        let expected: Vec<u32> = (1..=mentions.len() as u32).collect();
        prop_assert_eq!(indices, expected);
        for (i, m) in mentions.iter().enumerate() {
            prop_assert_eq!(m.occurrence_index, i as u32 + 1);
        }
    }

    #[test]
    fn normalization_is_idempotent(lf in form(false)) {
        let v = vocab();
        let text = lf.to_sparql(&v).expect("ground forms render");
        let once = normalize(&text, &v).expect("rendered SPARQL parses");
        let twice = normalize(&once, &v).expect("normalized SPARQL parses");
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn normalization_ignores_variable_names(lf in form(false)) {
        let v = vocab();
        let mut renamed = lf.clone();
        renamed.rename_variables(&|name| match name {
            "?firstanswer" | "?secondanswer" => name.to_string(),
            other => format!("?renamed_{}", &other[1..]),
        });
        let a = normalize(&lf.to_sparql(&v).unwrap(), &v).unwrap();
        let b = normalize(&renamed.to_sparql(&v).unwrap(), &v).unwrap();
        prop_assert_eq!(a, b);
    }
}
