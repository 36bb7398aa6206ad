//! Template-based synthetic newswire corpus.
//!
//! Sentences carry the material the transforms need (people, places,
//! institutions, numbers, dates, gendered pronouns, auxiliaries) and each
//! has a hand-written alternative phrasing that is served as its
//! paraphrase, so the whole pipeline can run offline.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::annotate::paraphrase::TableEntry;
use crate::annotate::{ParaphraseTable, Pivot};
use crate::corpus::CorpusRecord;

const FIRST_FEMALE: &[&str] = &[
    "Alice", "Maria", "Grace", "Amina", "Sofia", "Helen", "Yuki", "Clara", "Fatima", "Ingrid",
];
const FIRST_MALE: &[&str] = &[
    "Daniel", "Omar", "Lucas", "Kenji", "Pedro", "Victor", "Samuel", "Tomas", "Ivan", "Arthur",
];
const SURNAMES: &[&str] = &[
    "Moreau", "Okafor", "Lindqvist", "Tanaka", "Ferreira", "Novak", "Castillo", "Brennan", "Haddad",
    "Kowalski", "Whitfield", "Mensah", "Duarte", "Petrov",
];
const CITIES: &[&str] = &[
    "Paris", "Lisbon", "Nairobi", "Denver", "Osaka", "Krakow", "Lima", "Auckland", "Cairo", "Oslo",
    "Toronto", "Manila",
];
const ORGS: &[&str] = &[
    "Ministry of Health",
    "National Bank",
    "Harbor Institute",
    "Riverside Hospital",
    "Northern Rail Company",
    "Central University",
    "Coastal Energy Agency",
    "Metro Council",
];
const NOUNS: &[&str] = &[
    "shipment", "report", "contract", "proposal", "budget", "bridge", "survey", "merger",
];
const ADJECTIVES: &[&str] = &["optimistic", "worried", "uncertain", "confident", "cautious"];
const MONTHS: &[&str] = &[
    "January", "February", "March", "April", "June", "July", "August", "September", "October",
    "November", "December",
];
const WEEKDAYS: &[&str] = &["Monday", "Tuesday", "Wednesday", "Thursday", "Friday"];

#[derive(Debug, Clone)]
struct Person {
    name: String,
    female: bool,
}

impl Person {
    fn subj(&self) -> &'static str {
        if self.female { "she" } else { "he" }
    }
    fn poss(&self) -> &'static str {
        if self.female { "her" } else { "his" }
    }
}

fn cap(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn person(rng: &mut ChaCha8Rng) -> Person {
    let female = rng.gen_bool(0.5);
    let first = if female { FIRST_FEMALE } else { FIRST_MALE }.choose(rng).unwrap();
    let last = SURNAMES.choose(rng).unwrap();
    Person {
        name: format!("{first} {last}"),
        female,
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).unwrap()
}

/// One sentence and its alternative phrasing. `people` needs two or more.
fn sentence(rng: &mut ChaCha8Rng, people: &[Person]) -> (String, String) {
    let pi = rng.gen_range(0..people.len());
    let p = &people[pi];
    let q = &people[(pi + rng.gen_range(1..people.len())) % people.len()];
    let city = pick(rng, CITIES);
    let org = pick(rng, ORGS);
    let noun = pick(rng, NOUNS);
    let month = pick(rng, MONTHS);
    let day = rng.gen_range(1..=28);
    let year = rng.gen_range(1995..=2023);
    let n = rng.gen_range(2..=95);
    let adj = pick(rng, ADJECTIVES);
    let weekday = pick(rng, WEEKDAYS);
    match rng.gen_range(0..12) {
        0 => (
            format!("{} visited {city} on {month} {day}, {year}.", p.name),
            format!("On {month} {day}, {year}, {} visited {city}.", p.name),
        ),
        1 => (
            format!("{} said {} was {adj} about the {noun}.", p.name, p.subj()),
            format!("{} said that {} felt {adj} about the {noun}.", p.name, p.subj()),
        ),
        2 => (
            format!("The {org} reported that sales rose {n}% in {year}."),
            format!("According to the {org}, sales grew by {n}% in {year}."),
        ),
        3 => (
            format!("{} didn't expect the {noun} to arrive before {weekday}.", p.name),
            format!("{} did not think the {noun} would arrive before {weekday}.", p.name),
        ),
        4 => (
            format!("{} has worked at the {org} in {city} for {n} years.", cap(p.subj())),
            format!("For {n} years, {} has been employed by the {org} in {city}.", p.subj()),
        ),
        5 => (
            format!("Officials said {n} people were injured in {city} on {weekday}."),
            format!("According to officials, {n} people were hurt in {city} on {weekday}."),
        ),
        6 => (
            format!("{} will meet {} at the {org} next week.", p.name, q.name),
            format!("Next week, {} is going to meet {} at the {org}.", p.name, q.name),
        ),
        7 => (
            format!("{} told reporters that {} team could win the title.", p.name, p.poss()),
            format!("{} told journalists that {} team might win the title.", p.name, p.poss()),
        ),
        8 => (
            format!("The {noun} cost ${n} million, according to {}.", p.name),
            format!("According to {}, the {noun} cost ${n} million.", p.name),
        ),
        9 => (
            format!("{} lost {} {item} in {city} in {month} {year}.", p.name, p.poss(), item = pick(rng, &["passport", "luggage", "phone", "notes"])),
            format!("In {month} {year}, {} lost {} belongings in {city}.", p.name, p.poss()),
        ),
        10 => (
            format!("{} was not available for comment on {weekday}.", p.name),
            format!("{} could not be reached for comment on {weekday}.", p.name),
        ),
        _ => (
            format!("{} asked {} to review the {noun} before {weekday}.", p.name, q.name),
            format!("{} wanted {} to look over the {noun} ahead of {weekday}.", p.name, q.name),
        ),
    }
}

#[derive(Debug, Clone, Default)]
pub struct SynthCorpus {
    pub records: Vec<CorpusRecord>,
    /// Alternative phrasing for every sentence, under every pivot.
    pub paraphrases: Vec<TableEntry>,
}

impl SynthCorpus {
    pub fn table(&self) -> ParaphraseTable {
        let mut t = ParaphraseTable::default();
        for e in &self.paraphrases {
            t.insert(e.clone());
        }
        t
    }

    pub fn documents(&self) -> Vec<crate::corpus::Document> {
        self.records.iter().map(CorpusRecord::document).collect()
    }
}

/// `n_docs` documents of 6 to 10 sentences each, fully determined by `seed`.
pub fn corpus(n_docs: usize, seed: u64) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SynthCorpus::default();
    for d in 0..n_docs {
        let people: Vec<Person> = (0..rng.gen_range(2..=3)).map(|_| person(&mut rng)).collect();
        let n = rng.gen_range(6..=10);
        let mut sentences = Vec::with_capacity(n);
        for _ in 0..n {
            let (s, alt) = sentence(&mut rng, &people);
            for pivot in Pivot::ALL {
                out.paraphrases.push(TableEntry {
                    text: s.clone(),
                    pivot,
                    paraphrase: alt.clone(),
                });
            }
            sentences.push(s);
        }
        out.records.push(CorpusRecord {
            id: format!("synth-{d:05}"),
            text: sentences.join(" "),
            summary_sentences: None,
        });
    }
    out
}

fn write_lines<T: serde::Serialize>(items: &[T], path: &Path) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Write the corpus and its paraphrase table as JSON Lines.
pub fn write(corpus: &SynthCorpus, corpus_path: &Path, table_path: Option<&Path>) -> std::io::Result<()> {
    write_lines(&corpus.records, corpus_path)?;
    if let Some(p) = table_path {
        write_lines(&corpus.paraphrases, p)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    #[test]
    fn deterministic_and_segmentable() {
        let a = corpus(20, 5);
        let b = corpus(20, 5);
        assert_eq!(a.records, b.records);
        for r in &a.records {
            let doc = Document::new(r.id.clone(), r.text.clone());
            assert!(doc.sentences.len() >= 6, "{}", r.text);
            for i in 0..doc.sentences.len() {
                let s = doc.sentence_text(i);
                assert!(a.table().get(s, Pivot::Fr).is_some(), "{s}");
            }
        }
    }
}
