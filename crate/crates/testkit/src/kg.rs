//! A small synthetic DBLP-shaped knowledge graph: a handful of hand-written
//! publications plus a seeded random population around them.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dblpqa::linker::CandidateKind;

pub const AUTHORED_BY: &str = "<authoredBy>";
pub const PUBLISHED_IN: &str = "<publishedIn>";
pub const YEAR: &str = "<yearOfPublication>";
pub const TITLE: &str = "<title>";
pub const AFFILIATION: &str = "<primaryAffiliation>";

pub const BERT_TITLE: &str = "BERT: Pre-training of Deep Bidirectional Transformers for Language Understanding";
pub const BERT_FORMAL: &str = "https://dblp.org/rec/conf/naacl/DevlinCLT19";
pub const BERT_PREPRINT: &str = "https://dblp.org/rec/journals/corr/abs-1810-04805";
pub const DEVLIN: &str = "https://dblp.org/pid/69/4618";
pub const TIM_BERNERS_LEE: &str = "https://dblp.org/pid/b/TimBernersLee";
pub const ATTENTION_TITLE: &str = "Attention Is All You Need";

pub const DEFAULT_SEED: u64 = 20_230_601;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Uri(String),
    Year(i64),
    Int(i64),
    Str(String),
}

impl Node {
    pub fn number(&self) -> Option<i64> {
        match self {
            Node::Year(n) | Node::Int(n) => Some(*n),
            _ => None,
        }
    }

    /// Value equality; years and integers compare numerically.
    pub fn same(&self, other: &Node) -> bool {
        match (self.number(), other.number()) {
            (Some(a), Some(b)) => a == b,
            _ => self == other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triple {
    pub subject: String,
    pub relation: &'static str,
    pub object: Node,
}

/// Something the search API can return.
#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub uri: String,
    pub label: String,
    pub kind: CandidateKind,
    /// Multiplier on the search score; pre-prints rank below formal papers.
    pub prominence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Publication {
    pub uri: String,
    pub title: String,
    pub authors: Vec<String>,
    pub venue: String,
    pub year: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Person {
    pub uri: String,
    pub name: String,
    pub affiliation: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Kg {
    pub triples: Vec<Triple>,
    pub entities: Vec<Entity>,
    pub people: Vec<Person>,
    pub publications: Vec<Publication>,
    pub venues: Vec<String>,
}

const VENUES: [&str; 20] = [
    "ACL", "EMNLP", "NAACL-HLT", "ICESS", "CoRR", "SIGIR", "WWW", "ISWC", "ESWC", "ICML", "NeurIPS", "KDD",
    "VLDB", "SIGMOD", "ICDE", "AAAI", "IJCAI", "CIKM", "ECIR", "TPDL",
];

const FIRST: [&str; 24] = [
    "Anna", "Bruno", "Chen", "Dana", "Elif", "Farid", "Greta", "Hiro", "Ines", "Jonas", "Kavya", "Lars", "Mei",
    "Nadia", "Omar", "Priya", "Quentin", "Rosa", "Sven", "Tomas", "Uma", "Viktor", "Wen", "Yara",
];

const LAST: [&str; 24] = [
    "Albrecht", "Baptiste", "Castillo", "Dimitrov", "Eriksen", "Fontaine", "Galli", "Hartmann", "Ivanova",
    "Jansen", "Kowalski", "Lindqvist", "Moreau", "Nakamura", "Okafor", "Petrov", "Quint", "Rossi", "Schulz",
    "Takahashi", "Ueda", "Varga", "Wagner", "Zhou",
];

const TITLE_A: [&str; 12] = [
    "Learning", "Scalable", "Neural", "Efficient", "Robust", "Interactive", "Federated", "Semantic", "Adaptive",
    "Probabilistic", "Incremental", "Explainable",
];

const TITLE_B: [&str; 12] = [
    "Query Answering", "Entity Linking", "Graph Embeddings", "Index Structures", "Question Generation",
    "Knowledge Graphs", "Citation Analysis", "Ranking Models", "Schema Matching", "Text Classification",
    "Stream Processing", "Dialogue Systems",
];

const TITLE_C: [&str; 10] = [
    "over Scholarly Data", "for Digital Libraries", "at Web Scale", "with Sparse Supervision",
    "in Heterogeneous Networks", "under Resource Constraints", "for Open Domains", "from Noisy Sources",
    "with Transformers", "on Linked Data",
];

const AFFILIATIONS: [&str; 8] = [
    "University of Stuttgart",
    "Zhejiang University",
    "Leibniz Center for Informatics",
    "University of Oslo",
    "Technical University of Munich",
    "University of Tokyo",
    "MIT",
    "Google",
];

impl Kg {
    pub fn new(seed: u64) -> Self {
        let mut kg = Kg {
            venues: VENUES.iter().map(|v| v.to_string()).collect(),
            ..Kg::default()
        };
        kg.curated();
        kg.populate(seed);
        kg.index();
        kg
    }

    fn person(&mut self, uri: &str, name: &str, affiliation: Option<&str>) {
        self.people.push(Person {
            uri: uri.to_string(),
            name: name.to_string(),
            affiliation: affiliation.map(str::to_string),
        });
    }

    fn publication(&mut self, uri: &str, title: &str, authors: &[&str], venue: &str, year: i64) {
        self.publications.push(Publication {
            uri: uri.to_string(),
            title: title.to_string(),
            authors: authors.iter().map(|a| a.to_string()).collect(),
            venue: venue.to_string(),
            year,
        });
    }

    /// Entities the example questions and walkthrough rely on.
    fn curated(&mut self) {
        let chang = "https://dblp.org/pid/24/3578";
        let lee = "https://dblp.org/pid/121/7560";
        let toutanova = "https://dblp.org/pid/25/1520";
        self.person(DEVLIN, "Jacob Devlin", Some("Google"));
        self.person(chang, "Ming-Wei Chang", Some("Google"));
        self.person(lee, "Kenton Lee", Some("Google"));
        self.person(toutanova, "Kristina Toutanova", Some("Google"));
        let bert = [DEVLIN, chang, lee, toutanova];
        self.publication(BERT_FORMAL, BERT_TITLE, &bert, "NAACL-HLT", 2019);
        self.publication(BERT_PREPRINT, BERT_TITLE, &bert, "CoRR", 2018);
        self.publication(
            "https://dblp.org/rec/conf/icess/DevlinZ09",
            "A Scheduling Framework for Embedded Multiprocessor Systems",
            &[DEVLIN],
            "ICESS",
            2009,
        );
        self.publication(
            "https://dblp.org/rec/conf/acl/LeeCT19",
            "Latent Retrieval for Weakly Supervised Open Domain Question Answering",
            &[lee, chang, toutanova],
            "ACL",
            2019,
        );
        self.publication(
            "https://dblp.org/rec/conf/emnlp/ChangT20",
            "Dense Passage Scoring for Entity Retrieval",
            &[chang, toutanova],
            "EMNLP",
            2020,
        );

        let vaswani = "https://dblp.org/pid/47/9088";
        let shazeer = "https://dblp.org/pid/41/10210";
        self.person(vaswani, "Ashish Vaswani", None);
        self.person(shazeer, "Noam Shazeer", None);
        self.publication(
            "https://dblp.org/rec/conf/nips/VaswaniSPUJGKP17",
            ATTENTION_TITLE,
            &[vaswani, shazeer],
            "NeurIPS",
            2017,
        );

        self.person(TIM_BERNERS_LEE, "Tim Berners-Lee", Some("MIT"));
        let tbl = [
            ("https://dblp.org/rec/journals/cacm/Berners-Lee16", "Linked Data Platforms Revisited", "WWW", 2016),
            ("https://dblp.org/rec/conf/www/Berners-Lee18", "Solid: Personal Data Stores on the Web", "WWW", 2018),
            ("https://dblp.org/rec/conf/iswc/Berners-Lee19", "Decentralised Authorisation for Linked Data", "ISWC", 2019),
            ("https://dblp.org/rec/conf/www/Berners-Lee21", "Web Data Sovereignty in Practice", "WWW", 2021),
            ("https://dblp.org/rec/conf/eswc/Berners-Lee23", "Personal Knowledge Graphs and the Web", "ESWC", 2023),
        ];
        for (uri, title, venue, year) in tbl {
            self.publication(uri, title, &[TIM_BERNERS_LEE], venue, year);
        }
    }

    fn populate(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut names: Vec<(&str, &str)> = FIRST.iter().flat_map(|f| LAST.iter().map(move |l| (*f, *l))).collect();
        names.shuffle(&mut rng);
        let first_new = self.people.len();
        for (i, (f, l)) in names.into_iter().take(120).enumerate() {
            let uri = format!("https://dblp.org/pid/{}/{}", 100 + i, 1000 + rng.gen_range(0..9000));
            let affiliation = rng.gen_bool(0.7).then(|| *AFFILIATIONS.choose(&mut rng).expect("non-empty"));
            self.person(&uri, &format!("{f} {l}"), affiliation);
        }
        let population: Vec<String> = self.people[first_new..].iter().map(|p| p.uri.clone()).collect();
        let mut titles = std::collections::HashSet::new();
        for p in &self.publications {
            titles.insert(p.title.clone());
        }
        let mut made = 0;
        while made < 480 {
            let title = format!(
                "{} {} {}",
                TITLE_A.choose(&mut rng).expect("non-empty"),
                TITLE_B.choose(&mut rng).expect("non-empty"),
                TITLE_C.choose(&mut rng).expect("non-empty")
            );
            if !titles.insert(title.clone()) {
                continue;
            }
            let n = rng.gen_range(1..=4);
            let authors: Vec<&str> = population.choose_multiple(&mut rng, n).map(String::as_str).collect();
            let venue = *VENUES.choose(&mut rng).expect("non-empty");
            let year = rng.gen_range(2005..=2024);
            let lead = self
                .people
                .iter()
                .find(|p| p.uri == authors[0])
                .map(|p| p.name.rsplit(' ').next().unwrap_or("X").to_string())
                .unwrap_or_default();
            let uri = format!(
                "https://dblp.org/rec/conf/{}/{}{:02}{}",
                venue.to_lowercase().replace('-', ""),
                lead,
                year % 100,
                made
            );
            self.publication(&uri, &title, &authors, venue, year);
            made += 1;
        }
    }

    fn index(&mut self) {
        for p in &self.people {
            self.entities.push(Entity {
                uri: p.uri.clone(),
                label: p.name.clone(),
                kind: CandidateKind::Person,
                prominence: 1.0,
            });
            if let Some(a) = &p.affiliation {
                self.triples.push(Triple {
                    subject: p.uri.clone(),
                    relation: AFFILIATION,
                    object: Node::Str(a.clone()),
                });
            }
        }
        for p in &self.publications {
            self.entities.push(Entity {
                uri: p.uri.clone(),
                label: p.title.clone(),
                kind: CandidateKind::Publication,
                prominence: if p.venue == "CoRR" { 0.8 } else { 1.0 },
            });
            let mut push = |relation, object| {
                self.triples.push(Triple {
                    subject: p.uri.clone(),
                    relation,
                    object,
                })
            };
            for a in &p.authors {
                push(AUTHORED_BY, Node::Uri(a.clone()));
            }
            push(PUBLISHED_IN, Node::Str(p.venue.clone()));
            push(YEAR, Node::Year(p.year));
            push(TITLE, Node::Str(p.title.clone()));
        }
        for v in &self.venues {
            self.entities.push(Entity {
                uri: format!("https://dblp.org/db/conf/{}", v.to_lowercase().replace('-', "")),
                label: v.clone(),
                kind: CandidateKind::Venue,
                prominence: 1.0,
            });
        }
    }

    pub fn person_named(&self, name: &str) -> Option<&Person> {
        self.people.iter().find(|p| p.name == name)
    }

    pub fn publication_titled(&self, title: &str) -> Option<&Publication> {
        self.publications.iter().find(|p| p.title == title)
    }

    pub fn papers_of(&self, person: &str) -> impl Iterator<Item = &Publication> {
        let person = person.to_string();
        self.publications.iter().filter(move |p| p.authors.contains(&person))
    }
}

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// A search hit with its DBLP-style score.
#[derive(Debug, Clone, PartialEq)]
pub struct Hit<'a> {
    pub entity: &'a Entity,
    pub score: f64,
}

impl Kg {
    /// Every query word must occur in the label. Scores reward covering
    /// more of the label and are scaled by prominence.
    pub fn search(&self, kind: CandidateKind, query: &str, limit: usize) -> Vec<Hit<'_>> {
        let q = words(query);
        if q.is_empty() {
            return Vec::new();
        }
        let mut hits: Vec<Hit<'_>> = self
            .entities
            .iter()
            .filter(|e| e.kind == kind)
            .filter_map(|e| {
                let label = words(&e.label);
                if !q.iter().all(|w| label.contains(w)) {
                    return None;
                }
                let coverage = q.len() as f64 / label.len() as f64;
                let score = ((1.0 + 9.0 * coverage) * e.prominence).round();
                Some(Hit { entity: e, score })
            })
            .collect();
        hits.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.entity.uri.cmp(&b.entity.uri)));
        hits.truncate(limit);
        hits
    }
}
