//! Seeded question/SPARQL corpus over the toy graph, shaped like the public
//! DBLP question-answering benchmark: about twenty query families, prefixed
//! gold queries, W3C result sets as gold answers.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use dblpqa::eval::DatasetItem;
use dblpqa::logical_form::{parse_sparql, Vocabulary};
use dblpqa::sparql::{serialize_results, AnswerTable};

use crate::engine::Engine;
use crate::kg::{Kg, Person, Publication};

pub const PREFIX: &str = "PREFIX dblp: <https://dblp.org/rdf/schema#>\n";

/// Year that `YEAR(NOW())` stands for when gold answers are computed.
pub const REFERENCE_YEAR: i64 = 2024;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusItem {
    pub id: String,
    pub family: &'static str,
    pub question: String,
    pub gold_query: String,
    pub answers: AnswerTable,
}

impl CorpusItem {
    pub fn to_dataset_item(&self) -> DatasetItem {
        DatasetItem {
            id: self.id.clone(),
            question: self.question.clone(),
            gold_query: self.gold_query.clone(),
            gold_answers: self.answers.answer_set().into_iter().collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        let answer: Value = serde_json::from_str(&serialize_results(&self.answers)).expect("valid JSON");
        json!({
            "id": self.id,
            "question": { "string": self.question },
            "query": { "sparql": self.gold_query },
            "template_family": self.family,
            "answer": answer,
        })
    }
}

pub fn dataset_json(items: &[CorpusItem]) -> String {
    let doc = json!({ "questions": items.iter().map(CorpusItem::to_json).collect::<Vec<_>>() });
    let mut text = serde_json::to_string_pretty(&doc).expect("serializes");
    text.push('\n');
    text
}

struct Draft {
    family: &'static str,
    question: String,
    gold: String,
    /// Query evaluated for the gold answers when `gold` itself is outside
    /// the supported subset.
    answer_query: Option<String>,
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
    xs.choose(rng).expect("non-empty")
}

fn phrase(rng: &mut ChaCha8Rng, forms: &[&str], fill: &[(&str, &str)]) -> String {
    let mut s = pick(rng, forms).to_string();
    for (k, v) in fill {
        s = s.replace(k, v);
    }
    s
}

pub struct Generator<'a> {
    kg: &'a Kg,
    rng: ChaCha8Rng,
    /// Publications with at least one author that has other papers.
    papers: Vec<&'a Publication>,
    authors: Vec<&'a Person>,
}

pub const FAMILIES: [&str; 21] = [
    "authors-of-paper",
    "venue-of-paper",
    "year-of-paper",
    "title-of-paper",
    "papers-by-person",
    "papers-by-person-in-year",
    "papers-in-venue-in-year",
    "count-papers-by-person",
    "coauthors-of-person",
    "affiliation-of-person",
    "venues-of-person",
    "paper-published-in-year",
    "person-authored-paper",
    "authors-and-venues-of-other-papers",
    "other-papers-by-authors-of-paper",
    "papers-by-person-since-year",
    "papers-by-person-before-year",
    "papers-by-two-people",
    "papers-by-either-person",
    "top-venue-of-person",
    "papers-by-person-outside-venue",
];

/// Relative-date family whose gold query uses `YEAR(NOW())`, which the
/// supported subset does not cover.
pub const RELATIVE_FAMILY: &str = "papers-by-person-in-last-n-years";

impl<'a> Generator<'a> {
    pub fn new(kg: &'a Kg, seed: u64) -> Self {
        let authors: Vec<&Person> = kg.people.iter().filter(|p| kg.papers_of(&p.uri).next().is_some()).collect();
        Self {
            kg,
            rng: ChaCha8Rng::seed_from_u64(seed),
            papers: kg.publications.iter().collect(),
            authors,
        }
    }

    fn paper(&mut self) -> &'a Publication {
        let &p = pick(&mut self.rng, &self.papers);
        p
    }

    fn person(&mut self) -> &'a Person {
        let &p = pick(&mut self.rng, &self.authors);
        p
    }

    fn draft(&mut self, family: &'static str, seq: usize) -> Draft {
        let d = |question: String, gold: String| Draft {
            family,
            question,
            gold: format!("{PREFIX}{gold}"),
            answer_query: None,
        };
        match family {
            "authors-of-paper" => {
                let p = self.paper();
                let q = phrase(&mut self.rng, &["Who are the authors of '{T}'?", "Who wrote '{T}'?", "List the authors of the paper '{T}'."], &[("{T}", &p.title)]);
                d(q, format!("SELECT DISTINCT ?answer WHERE {{ <{}> dblp:authoredBy ?answer }}", p.uri))
            }
            "venue-of-paper" => {
                let p = self.paper();
                let q = phrase(&mut self.rng, &["Where was '{T}' published?", "In which venue did '{T}' appear?"], &[("{T}", &p.title)]);
                d(q, format!("SELECT DISTINCT ?answer WHERE {{ <{}> dblp:publishedIn ?answer }}", p.uri))
            }
            "year-of-paper" => {
                let p = self.paper();
                let q = phrase(&mut self.rng, &["When was '{T}' published?", "In which year was '{T}' published?"], &[("{T}", &p.title)]);
                d(q, format!("SELECT DISTINCT ?answer WHERE {{ <{}> dblp:yearOfPublication ?answer }}", p.uri))
            }
            "title-of-paper" => {
                let a = self.person();
                let p = self.kg.papers_of(&a.uri).next().expect("authors have papers");
                let q = format!("What is the title of the {} paper by {} at {}?", p.year, a.name, p.venue);
                d(q, format!("SELECT DISTINCT ?answer WHERE {{ ?x dblp:authoredBy <{}> . ?x dblp:publishedIn '{}' . ?x dblp:yearOfPublication {} . ?x dblp:title ?answer }}", a.uri, p.venue, p.year))
            }
            "papers-by-person" => {
                let a = self.person();
                let q = phrase(&mut self.rng, &["Which papers did {N} write?", "What papers has {N} published?", "List the publications of {N}."], &[("{N}", &a.name)]);
                d(q, format!("SELECT DISTINCT ?answer WHERE {{ ?answer dblp:authoredBy <{}> }}", a.uri))
            }
            "papers-by-person-in-year" => {
                let a = self.person();
                let p = self.kg.papers_of(&a.uri).next().expect("authors have papers");
                let q = format!("Which papers did {} publish in {}?", a.name, p.year);
                d(q, format!("SELECT DISTINCT ?answer WHERE {{ ?answer dblp:authoredBy <{}> . ?answer dblp:yearOfPublication {} }}", a.uri, p.year))
            }
            "papers-in-venue-in-year" => {
                let p = self.paper();
                let q = format!("Which papers were published at the {} conference in {}?", p.venue, p.year);
                d(q, format!("SELECT DISTINCT ?answer WHERE {{ ?answer dblp:publishedIn '{}' . ?answer dblp:yearOfPublication {} }}", p.venue, p.year))
            }
            "count-papers-by-person" => {
                let a = self.person();
                let q = phrase(&mut self.rng, &["How many papers has {N} published?", "How many publications does {N} have?"], &[("{N}", &a.name)]);
                d(q, format!("SELECT (COUNT(DISTINCT ?answer) AS ?count) WHERE {{ ?answer dblp:authoredBy <{}> }}", a.uri))
            }
            "coauthors-of-person" => {
                let a = self.person();
                let q = phrase(&mut self.rng, &["Who are the co-authors of {N}?", "With whom has {N} written papers?"], &[("{N}", &a.name)]);
                d(q, format!("SELECT DISTINCT ?answer WHERE {{ ?x dblp:authoredBy <{0}> . ?x dblp:authoredBy ?answer FILTER(?answer != <{0}>) }}", a.uri))
            }
            "affiliation-of-person" => {
                let a = self.person();
                let q = phrase(&mut self.rng, &["What is the primary affiliation of {N}?", "Where does {N} work?"], &[("{N}", &a.name)]);
                d(q, format!("SELECT DISTINCT ?answer WHERE {{ <{}> dblp:primaryAffiliation ?answer }}", a.uri))
            }
            "venues-of-person" => {
                let a = self.person();
                let q = phrase(&mut self.rng, &["In which venues has {N} published?", "Where does {N} publish?"], &[("{N}", &a.name)]);
                d(q, format!("SELECT DISTINCT ?answer WHERE {{ ?x dblp:authoredBy <{}> . ?x dblp:publishedIn ?answer }}", a.uri))
            }
            "paper-published-in-year" => {
                let p = self.paper();
                let year = if self.rng.gen_bool(0.5) { p.year } else { p.year - 1 };
                let q = format!("Was '{}' published in {}?", p.title, year);
                d(q, format!("ASK {{ <{}> dblp:yearOfPublication {} }}", p.uri, year))
            }
            "person-authored-paper" => {
                let p = self.paper();
                let a = self.person();
                let q = format!("Did {} write '{}'?", a.name, p.title);
                d(q, format!("ASK {{ <{}> dblp:authoredBy <{}> }}", p.uri, a.uri))
            }
            "authors-and-venues-of-other-papers" => {
                let p = self.paper();
                let q = phrase(
                    &mut self.rng,
                    &[
                        "please enumerate the authors of '{T}' along with the venues where they have published other papers.",
                        "Who wrote '{T}' and in which venues did they publish their other papers?",
                        "List the authors of '{T}' and the venues of their other papers.",
                    ],
                    &[("{T}", &p.title)],
                );
                d(q, format!("SELECT DISTINCT ?firstanswer ?secondanswer WHERE {{ <{0}> dblp:authoredBy ?firstanswer . ?x dblp:authoredBy ?firstanswer . ?x dblp:publishedIn ?secondanswer FILTER(?x != <{0}>) }}", p.uri))
            }
            "other-papers-by-authors-of-paper" => {
                let p = self.paper();
                let q = phrase(&mut self.rng, &["Which other papers were written by the authors of '{T}'?", "What else did the authors of '{T}' publish?"], &[("{T}", &p.title)]);
                d(q, format!("SELECT DISTINCT ?answer WHERE {{ <{0}> dblp:authoredBy ?x . ?answer dblp:authoredBy ?x FILTER(?answer != <{0}>) }}", p.uri))
            }
            "papers-by-person-since-year" => {
                let a = self.person();
                let year = 2015 + (seq % 9) as i64;
                let q = format!("Which papers has {} published since {}?", a.name, year);
                d(q, format!("SELECT DISTINCT ?answer WHERE {{ ?answer dblp:authoredBy <{}> . ?answer dblp:yearOfPublication ?year FILTER(?year >= {}) }}", a.uri, year))
            }
            "papers-by-person-before-year" => {
                let a = self.person();
                let year = 2010 + (seq % 9) as i64;
                let q = format!("Which papers did {} publish before {}?", a.name, year);
                d(q, format!("SELECT DISTINCT ?answer WHERE {{ ?answer dblp:authoredBy <{}> . ?answer dblp:yearOfPublication ?year FILTER(?year < {}) }}", a.uri, year))
            }
            "papers-by-two-people" => {
                let p = self.paper();
                let (a, b) = match p.authors.as_slice() {
                    [a, b, ..] => (a.clone(), b.clone()),
                    _ => (p.authors[0].clone(), self.person().uri.clone()),
                };
                let name = |u: &str| self.kg.people.iter().find(|x| x.uri == u).map(|x| x.name.clone()).unwrap_or_default();
                let q = format!("Which papers did {} and {} write together?", name(&a), name(&b));
                d(q, format!("SELECT DISTINCT ?answer WHERE {{ ?answer dblp:authoredBy <{a}> . ?answer dblp:authoredBy <{b}> }}"))
            }
            "papers-by-either-person" => {
                let a = self.person();
                let b = self.person();
                let q = format!("Which papers were written by {} or {}?", a.name, b.name);
                d(q, format!("SELECT DISTINCT ?answer WHERE {{ {{ ?answer dblp:authoredBy <{}> }} UNION {{ ?answer dblp:authoredBy <{}> }} }}", a.uri, b.uri))
            }
            "top-venue-of-person" => {
                let a = self.person();
                let q = format!("In which venue has {} published the most?", a.name);
                d(q, format!("SELECT ?answer WHERE {{ ?x dblp:authoredBy <{}> . ?x dblp:publishedIn ?answer }} GROUP BY ?answer ORDER BY DESC(COUNT(?x)) ?answer LIMIT 1", a.uri))
            }
            "papers-by-person-outside-venue" => {
                let a = self.person();
                let venue = pick(&mut self.rng, &self.kg.venues).clone();
                let q = format!("Which papers by {} did not appear at {}?", a.name, venue);
                d(q, format!("SELECT DISTINCT ?answer WHERE {{ ?answer dblp:authoredBy <{}> FILTER NOT EXISTS {{ ?answer dblp:publishedIn '{}' }} }}", a.uri, venue))
            }
            RELATIVE_FAMILY => {
                let a = self.person();
                let n = 3 + (seq % 5) as i64;
                let q = format!("What papers has {} published in the last {} years?", a.name, n);
                let body = |bound: String| format!("{PREFIX}SELECT DISTINCT ?answer WHERE {{ ?answer dblp:authoredBy <{}> . ?answer dblp:yearOfPublication ?year FILTER(?year >= {bound}) }}", a.uri);
                Draft {
                    family,
                    question: q,
                    gold: body(format!("YEAR(NOW()) - {n}")),
                    answer_query: Some(body((REFERENCE_YEAR - n).to_string())),
                }
            }
            other => unreachable!("unknown family {other}"),
        }
    }

    /// `count` items with ids `{prefix}{nnnn}`. Every fiftieth item is a
    /// relative-date question; the rest cycle through the families in a
    /// seeded order.
    pub fn generate(&mut self, prefix: &str, count: usize) -> Vec<CorpusItem> {
        let vocab = Vocabulary::dblp();
        let engine = Engine::new(self.kg);
        let mut items = Vec::with_capacity(count);
        let mut order: Vec<&'static str> = Vec::new();
        for i in 0..count {
            let family = if i % 50 == 49 {
                RELATIVE_FAMILY
            } else {
                if order.is_empty() {
                    order = FAMILIES.to_vec();
                    order.shuffle(&mut self.rng);
                }
                order.pop().expect("refilled")
            };
            let draft = self.draft(family, i);
            let source = draft.answer_query.as_deref().unwrap_or(&draft.gold);
            let form = parse_sparql(source, &vocab).unwrap_or_else(|e| panic!("{family}: {e}\n{source}"));
            let answers = engine.evaluate(&form).unwrap_or_else(|e| panic!("{family}: {e}"));
            items.push(CorpusItem {
                id: format!("{prefix}{i:04}"),
                family: draft.family,
                question: draft.question,
                gold_query: draft.gold,
                answers,
            });
        }
        items
    }
}
