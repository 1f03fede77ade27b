//! Evaluates the supported SPARQL subset over a [`Kg`].

use std::cmp::Ordering;
use std::collections::HashMap;

use dblpqa::logical_form::{
    FormKind, GroupPattern, Literal, LogicalForm, Operator, OrderExpr, PatternElement, ProjectionItem,
    SortDirection, Term,
};
use dblpqa::logical_form::Filter;
use dblpqa::sparql::{AnswerTable, AnswerValue};

use crate::kg::{Kg, Node};

const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
const XSD_GYEAR: &str = "http://www.w3.org/2001/XMLSchema#gYear";

type Solution = HashMap<String, Node>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalError(pub String);

impl std::fmt::Display for EvalError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn constant(term: &Term) -> Result<Option<Node>, EvalError> {
    Ok(match term {
        Term::Variable(_) => None,
        Term::Uri(u) => Some(Node::Uri(u.clone())),
        Term::Literal(Literal::Integer { value }) => Some(Node::Int(*value)),
        Term::Literal(Literal::String { value, .. }) => Some(Node::Str(value.clone())),
        Term::Mention(m) => return Err(EvalError(format!("unresolved mention {m}"))),
        Term::Placeholder(n) => return Err(EvalError(format!("unbound placeholder <topic{n}>"))),
    })
}

fn resolve(term: &Term, sol: &Solution) -> Result<Option<Node>, EvalError> {
    match term {
        Term::Variable(v) => Ok(sol.get(v).cloned()),
        other => constant(other),
    }
}

/// Binds `term` to `node` in `sol`, or checks agreement. False on conflict.
fn unify(term: &Term, node: &Node, sol: &mut Solution) -> Result<bool, EvalError> {
    match term {
        Term::Variable(v) => match sol.get(v) {
            Some(bound) => Ok(bound.same(node)),
            None => {
                sol.insert(v.clone(), node.clone());
                Ok(true)
            }
        },
        other => Ok(constant(other)?.is_some_and(|c| c.same(node))),
    }
}

fn compare(a: &Node, b: &Node) -> Option<Ordering> {
    match (a.number(), b.number()) {
        (Some(x), Some(y)) => Some(x.cmp(&y)),
        (None, None) => match (a, b) {
            (Node::Str(x), Node::Str(y)) | (Node::Uri(x), Node::Uri(y)) => Some(x.cmp(y)),
            _ => None,
        },
        _ => None,
    }
}

fn holds(op: Operator, a: &Node, b: &Node) -> bool {
    match op {
        Operator::Is => a.same(b),
        Operator::IsNot => !a.same(b),
        _ => match compare(a, b) {
            Some(o) => match op {
                Operator::Lt => o == Ordering::Less,
                Operator::Gt => o == Ordering::Greater,
                Operator::Leq => o != Ordering::Greater,
                Operator::Geq => o != Ordering::Less,
                Operator::Is | Operator::IsNot => unreachable!(),
            },
            None => false,
        },
    }
}

pub struct Engine<'a> {
    kg: &'a Kg,
}

impl<'a> Engine<'a> {
    pub fn new(kg: &'a Kg) -> Self {
        Self { kg }
    }

    fn group(&self, group: &GroupPattern, input: Vec<Solution>) -> Result<Vec<Solution>, EvalError> {
        let mut sols = input;
        let mut filters = Vec::new();
        for el in &group.elements {
            match el {
                PatternElement::Triple(t) => {
                    let mut next = Vec::new();
                    for sol in &sols {
                        for kt in self.kg.triples.iter().filter(|k| k.relation == t.relation) {
                            let mut s = sol.clone();
                            if unify(&t.subject, &Node::Uri(kt.subject.clone()), &mut s)?
                                && unify(&t.object, &kt.object, &mut s)?
                            {
                                next.push(s);
                            }
                        }
                    }
                    sols = next;
                }
                PatternElement::Union { branches } => {
                    let mut next = Vec::new();
                    for sol in &sols {
                        for b in branches {
                            next.extend(self.group(b, vec![sol.clone()])?);
                        }
                    }
                    sols = next;
                }
                PatternElement::Filter(f) => filters.push(f),
            }
        }
        for f in filters {
            let mut kept = Vec::new();
            for sol in sols {
                let pass = match f {
                    Filter::Compare { lhs, op, rhs } => match (resolve(lhs, &sol)?, resolve(rhs, &sol)?) {
                        (Some(a), Some(b)) => holds(*op, &a, &b),
                        _ => false,
                    },
                    Filter::NotExists { pattern } => self.group(pattern, vec![sol.clone()])?.is_empty(),
                };
                if pass {
                    kept.push(sol);
                }
            }
            sols = kept;
        }
        Ok(sols)
    }

    pub fn evaluate(&self, form: &LogicalForm) -> Result<AnswerTable, EvalError> {
        let sols = self.group(&form.body, vec![Solution::new()])?;
        if form.kind == FormKind::Ask {
            return Ok(AnswerTable::boolean(!sols.is_empty()));
        }
        let aggregate = !form.group_by.is_empty()
            || form.projection.iter().any(|p| matches!(p, ProjectionItem::Count { .. }));

        // Each row keeps the solutions it stands for, for ORDER BY COUNT.
        let mut rows: Vec<(Solution, Vec<Solution>)> = if aggregate {
            let mut groups: Vec<(Vec<Option<Node>>, Vec<Solution>)> = Vec::new();
            for s in sols {
                let key: Vec<Option<Node>> = form.group_by.iter().map(|v| s.get(v).cloned()).collect();
                match groups.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, members)) => members.push(s),
                    None => groups.push((key, vec![s])),
                }
            }
            if groups.is_empty() && form.group_by.is_empty() {
                groups.push((Vec::new(), Vec::new()));
            }
            groups
                .into_iter()
                .map(|(key, members)| {
                    let mut row = Solution::new();
                    for (v, k) in form.group_by.iter().zip(key) {
                        if let Some(k) = k {
                            row.insert(v.clone(), k);
                        }
                    }
                    for p in &form.projection {
                        if let ProjectionItem::Count { distinct, variable, alias } = p {
                            row.insert(alias.clone(), Node::Int(count(&members, variable, *distinct)));
                        }
                    }
                    (row, members)
                })
                .collect()
        } else {
            sols.into_iter().map(|s| (s.clone(), vec![s])).collect()
        };

        if !form.order_by.is_empty() {
            let key = |row: &(Solution, Vec<Solution>), e: &OrderExpr| -> Option<Node> {
                match e {
                    OrderExpr::Variable { name } => row.0.get(name).cloned(),
                    OrderExpr::Count { distinct, variable } => Some(Node::Int(count(&row.1, variable, *distinct))),
                }
            };
            rows.sort_by(|a, b| {
                for k in &form.order_by {
                    let o = order_nodes(key(a, &k.expr).as_ref(), key(b, &k.expr).as_ref());
                    let o = if k.direction == Some(SortDirection::Desc) { o.reverse() } else { o };
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                Ordering::Equal
            });
        }

        let columns: Vec<String> = form
            .projection
            .iter()
            .map(|p| match p {
                ProjectionItem::Variable { name } => name.clone(),
                ProjectionItem::Count { alias, .. } => alias.clone(),
            })
            .collect();
        let mut out: Vec<Vec<AnswerValue>> = Vec::new();
        for (row, _) in rows {
            let cells: Vec<AnswerValue> = columns.iter().map(|c| value(row.get(c))).collect();
            if form.distinct && out.contains(&cells) {
                continue;
            }
            out.push(cells);
        }
        if let Some(limit) = form.limit {
            out.truncate(limit as usize);
        }
        Ok(AnswerTable {
            columns: columns.iter().map(|c| c.trim_start_matches('?').to_string()).collect(),
            rows: out,
            truncated: false,
        })
    }
}

fn count(members: &[Solution], variable: &str, distinct: bool) -> i64 {
    let bound: Vec<&Node> = members.iter().filter_map(|s| s.get(variable)).collect();
    if distinct {
        let mut unique: Vec<&Node> = Vec::new();
        for n in bound {
            if !unique.iter().any(|u| u.same(n)) {
                unique.push(n);
            }
        }
        unique.len() as i64
    } else {
        bound.len() as i64
    }
}

/// Unbound first, then numbers, strings, URIs.
fn order_nodes(a: Option<&Node>, b: Option<&Node>) -> Ordering {
    fn rank(n: Option<&Node>) -> u8 {
        match n {
            None => 0,
            Some(Node::Year(_) | Node::Int(_)) => 1,
            Some(Node::Str(_)) => 2,
            Some(Node::Uri(_)) => 3,
        }
    }
    match (a, b) {
        (Some(x), Some(y)) => compare(x, y).unwrap_or_else(|| rank(a).cmp(&rank(b))),
        _ => rank(a).cmp(&rank(b)),
    }
}

fn value(node: Option<&Node>) -> AnswerValue {
    match node {
        None => AnswerValue::Unbound,
        Some(Node::Uri(u)) => AnswerValue::uri(u.clone()),
        Some(Node::Str(s)) => AnswerValue::literal(s.clone()),
        Some(Node::Year(y)) => AnswerValue::Literal {
            value: y.to_string(),
            datatype: Some(XSD_GYEAR.to_string()),
            lang: None,
        },
        Some(Node::Int(n)) => AnswerValue::Literal {
            value: n.to_string(),
            datatype: Some(XSD_INTEGER.to_string()),
            lang: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{Kg, BERT_FORMAL, DEFAULT_SEED, DEVLIN, TIM_BERNERS_LEE};
    use dblpqa::logical_form::{parse_sparql, Vocabulary};

    fn run(kg: &Kg, q: &str) -> AnswerTable {
        let form = parse_sparql(q, &Vocabulary::dblp()).unwrap();
        Engine::new(kg).evaluate(&form).unwrap()
    }

    const P: &str = "PREFIX dblp: <https://dblp.org/rdf/schema#> ";

    #[test]
    fn walkthrough_query() {
        let kg = Kg::new(DEFAULT_SEED);
        let t = run(
            &kg,
            &format!("{P}SELECT DISTINCT ?firstanswer ?secondanswer WHERE {{ <{BERT_FORMAL}> dblp:authoredBy ?firstanswer . ?x dblp:authoredBy ?firstanswer . ?x dblp:publishedIn ?secondanswer FILTER(?x != <{BERT_FORMAL}>) }}"),
        );
        assert_eq!(t.columns, vec!["firstanswer", "secondanswer"]);
        let first: Vec<String> = t.column("firstanswer").unwrap().iter().filter_map(|v| v.canonical()).collect();
        let second: Vec<String> = t.column("secondanswer").unwrap().iter().filter_map(|v| v.canonical()).collect();
        assert!(first.contains(&DEVLIN.to_string()));
        assert!(second.contains(&"ICESS".to_string()));
        assert!(second.contains(&"ACL".to_string()));
        assert!(!second.contains(&"NAACL-HLT".to_string()));
    }

    #[test]
    fn year_filter_count_and_ask() {
        let kg = Kg::new(DEFAULT_SEED);
        let t = run(
            &kg,
            &format!("{P}SELECT DISTINCT ?answer WHERE {{ ?answer dblp:authoredBy <{TIM_BERNERS_LEE}> . ?answer dblp:yearOfPublication ?year FILTER(?year >= 2019) }}"),
        );
        assert_eq!(t.rows.len(), 3);
        let c = run(&kg, &format!("{P}SELECT (COUNT(DISTINCT ?answer) AS ?count) WHERE {{ ?answer dblp:authoredBy <{TIM_BERNERS_LEE}> }}"));
        assert_eq!(c.answer_set(), vec!["5".to_string()]);
        let no = run(&kg, &format!("{P}ASK {{ <{BERT_FORMAL}> dblp:yearOfPublication 2017 }}"));
        assert_eq!(no.as_boolean(), Some(false));
        let yes = run(&kg, &format!("{P}ASK {{ <{BERT_FORMAL}> dblp:yearOfPublication 2019 }}"));
        assert_eq!(yes.as_boolean(), Some(true));
    }

    #[test]
    fn group_order_limit() {
        let kg = Kg::new(DEFAULT_SEED);
        let t = run(
            &kg,
            &format!("{P}SELECT ?answer WHERE {{ ?x dblp:authoredBy <{TIM_BERNERS_LEE}> . ?x dblp:publishedIn ?answer }} GROUP BY ?answer ORDER BY DESC(COUNT(?x)) LIMIT 1"),
        );
        assert_eq!(t.answer_set(), vec!["WWW".to_string()]);
    }

    #[test]
    fn empty_count_is_zero() {
        let kg = Kg::new(DEFAULT_SEED);
        let t = run(&kg, &format!("{P}SELECT (COUNT(?a) AS ?n) WHERE {{ ?a dblp:authoredBy <https://dblp.org/pid/none> }}"));
        assert_eq!(t.answer_set(), vec!["0".to_string()]);
    }
}
