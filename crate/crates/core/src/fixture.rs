//! Synthetic knowledge graphs with planted relations.
//!
//! The capital world has states with five populous cities each, one of
//! which is the capital. Government agencies are headquartered in the
//! capital and have jurisdiction over the state; persons and companies
//! cluster in the bigger cities. A second, biomedical-style world plants
//! `causes` links between proteins and diseases.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, KnowledgeGraph};
use crate::sampling::{build_testcase, rng, write_statements, NegativeStrategy, Pair};

pub const MIN_STATES: usize = 10;
pub const CITIES_PER_STATE: usize = 5;

const CITY: &[&str] = &["city", "settlement", "populated place"];
const STATE: &[&str] = &["state", "administrative region"];

/// Triples (duplicates allowed) plus entity labels, in emission order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Fixture {
    pub triples: Vec<(String, String, String)>,
    pub labels: Vec<(String, Vec<String>)>,
}

impl Fixture {
    fn edge(&mut self, s: &str, p: &str, o: &str) {
        self.triples.push((s.into(), p.into(), o.into()));
    }

    fn label(&mut self, e: &str, labels: &[&str]) {
        self.labels
            .push((e.into(), labels.iter().map(|s| s.to_string()).collect()));
    }

    pub fn graph(&self) -> KnowledgeGraph {
        let mut b = GraphBuilder::new();
        for (s, p, o) in &self.triples {
            b.add_triple(s, p, o);
        }
        for (e, l) in &self.labels {
            b.add_labels(e, l.iter().map(String::as_str));
        }
        b.build()
    }

    pub fn write_edges(&self, mut w: impl Write) -> std::io::Result<()> {
        for (s, p, o) in &self.triples {
            writeln!(w, "{s}\t{p}\t{o}")?;
        }
        Ok(())
    }

    pub fn write_labels(&self, mut w: impl Write) -> std::io::Result<()> {
        for (e, l) in &self.labels {
            writeln!(w, "{e}\t{}", l.join(","))?;
        }
        Ok(())
    }
}

/// One generated state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateInfo {
    pub name: String,
    pub capital: String,
    /// Cities by population, largest first; includes the capital.
    pub cities: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapitalWorld {
    pub fixture: Fixture,
    pub states: Vec<StateInfo>,
}

impl CapitalWorld {
    pub fn capital_pairs(&self) -> Vec<(&str, &str)> {
        self.states
            .iter()
            .map(|s| (s.capital.as_str(), s.name.as_str()))
            .collect()
    }

    /// Every populous non-capital city paired with its state.
    pub fn confounder_pairs(&self) -> Vec<(&str, &str)> {
        self.states
            .iter()
            .flat_map(|s| {
                s.cities
                    .iter()
                    .filter(move |c| **c != s.capital)
                    .map(move |c| (c.as_str(), s.name.as_str()))
            })
            .collect()
    }
}

struct Named {
    state: &'static str,
    agency: &'static str,
    cities: [&'static str; CITIES_PER_STATE],
    capital_rank: usize,
}

const NAMED: [Named; 3] = [
    Named {
        state: "Illinois",
        agency: "Illinois_Department_of_Transportation",
        cities: ["Chicago", "Aurora", "Rockford", "Joliet", "Springfield"],
        capital_rank: 4,
    },
    Named {
        state: "Massachusetts",
        agency: "Massachusetts_Department_of_Transportation",
        cities: ["Boston", "Worcester", "Lowell", "Cambridge", "Brockton"],
        capital_rank: 0,
    },
    Named {
        state: "California",
        agency: "California_Department_of_Transportation",
        cities: ["Los_Angeles", "San_Diego", "San_Jose", "San_Francisco", "Sacramento"],
        capital_rank: 4,
    },
];

/// Persons per city by population rank.
const PERSONS_BY_RANK: [usize; CITIES_PER_STATE] = [9, 7, 6, 5, 4];
const UNIVERSITIES_BY_RANK: [usize; CITIES_PER_STATE] = [3, 2, 1, 1, 0];

/// Generates the capital world. Needs at least [`MIN_STATES`] states so
/// that 10-fold cross validation has a true statement per fold.
pub fn capital_world(n_states: usize, seed: u64) -> Result<CapitalWorld> {
    if n_states < MIN_STATES {
        return Err(Error::InvalidArgument(format!(
            "capital world needs at least {MIN_STATES} states for 10-fold cross validation, got {n_states}"
        )));
    }
    let mut rng = rng(seed);
    let mut f = Fixture::default();
    let mut states = Vec::with_capacity(n_states);
    for i in 0..n_states {
        let (name, cities, capital_rank, first_agency) = match NAMED.get(i) {
            Some(n) => (
                n.state.to_string(),
                n.cities.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                n.capital_rank,
                Some(n.agency.to_string()),
            ),
            None => {
                let rank = *[1usize, 2, 2, 3, 3, 4, 4, 4].choose(&mut rng).unwrap();
                (
                    format!("State_{i:03}"),
                    (0..CITIES_PER_STATE).map(|c| format!("City_{i:03}_{c}")).collect(),
                    rank,
                    None,
                )
            }
        };
        let capital = cities[capital_rank].clone();
        f.label(&name, STATE);
        for (rank, city) in cities.iter().enumerate() {
            if city == "Sacramento" {
                f.label(city, &CITY[1..]);
            } else {
                f.label(city, CITY);
            }
            f.edge(city, "isPartOf", &name);
            f.edge(city, "country", "United_States");
            let persons = PERSONS_BY_RANK[rank] + rng.gen_range(0..3);
            for k in 0..persons {
                let p = format!("Person_{i:03}_{rank}_{k}");
                if rng.gen_bool(0.9) {
                    f.label(&p, &["person"]);
                }
                f.edge(&p, "deathPlace", city);
                if rng.gen_bool(0.8) {
                    f.edge(&p, "deathPlace", &name);
                }
                if rng.gen_bool(0.3) {
                    f.edge(&p, "birthPlace", city);
                }
            }
            for k in 0..UNIVERSITIES_BY_RANK[rank] + rng.gen_range(0..2) {
                let u = format!("University_{i:03}_{rank}_{k}");
                f.label(&u, &["university", "organisation"]);
                f.edge(&u, "city", city);
                f.edge(&u, "state", &name);
            }
            let companies = (CITIES_PER_STATE - rank) / 2 + rng.gen_range(0..2);
            for k in 0..companies {
                let c = format!("Company_{i:03}_{rank}_{k}");
                f.label(&c, &["company", "organisation"]);
                f.edge(&c, "location", city);
            }
        }
        f.edge(&capital, "capitalOf", &name);

        let agencies = rng.gen_range(1..=3);
        for k in 0..agencies {
            let a = match (&first_agency, k) {
                (Some(n), 0) => n.clone(),
                _ => format!("Agency_{i:03}_{k}"),
            };
            f.label(&a, &["government agency", "organisation"]);
            f.edge(&a, "headquarter", &capital);
            f.edge(&a, "jurisdiction", &name);
            if rng.gen_bool(0.3) {
                f.edge(&a, "location", &capital);
            }
        }
        if rng.gen_bool(0.3) {
            // a regional office outside the capital
            let city = &cities[(capital_rank + 1 + rng.gen_range(0..CITIES_PER_STATE - 1)) % CITIES_PER_STATE];
            let a = format!("Office_{i:03}");
            f.label(&a, &["government agency", "organisation"]);
            f.edge(&a, "location", city);
            f.edge(&a, "jurisdiction", &name);
        }
        states.push(StateInfo { name, capital, cities });
    }
    f.label("United_States", &["country"]);
    Ok(CapitalWorld { fixture: f, states })
}

/// Protein-disease world: true `causes` pairs are linked through a gene
/// (`stimulates`, then `affects`, often repeated) and sometimes through a
/// parent disease.
pub fn biomedical_world(n_pairs: usize, seed: u64) -> Result<(Fixture, Vec<(String, String)>)> {
    if n_pairs < MIN_STATES {
        return Err(Error::InvalidArgument(format!(
            "biomedical world needs at least {MIN_STATES} causal pairs, got {n_pairs}"
        )));
    }
    let mut rng = rng(seed);
    let mut f = Fixture::default();
    let proteins: Vec<String> = (0..n_pairs * 2).map(|i| format!("aapp_{i:03}")).collect();
    let diseases: Vec<String> = (0..n_pairs * 2).map(|i| format!("dsyn_{i:03}")).collect();
    let genes: Vec<String> = (0..n_pairs * 2).map(|i| format!("gngm_{i:03}")).collect();
    let parents: Vec<String> = (0..n_pairs / 4 + 1).map(|i| format!("dsyn_group_{i:02}")).collect();
    for p in &proteins {
        f.label(p, &["aapp", "chemical"]);
    }
    for d in diseases.iter().chain(&parents) {
        f.label(d, &["dsyn", "disorder"]);
    }
    for g in &genes {
        f.label(g, &["gngm", "gene"]);
    }
    for (k, d) in diseases.iter().enumerate() {
        f.edge(d, "isA", &parents[k % parents.len()]);
    }
    let mut truth = Vec::with_capacity(n_pairs);
    for k in 0..n_pairs {
        let (p, d, g) = (&proteins[k], &diseases[k], &genes[k]);
        f.edge(p, "causes", d);
        for _ in 0..rng.gen_range(1..=3) {
            f.edge(p, "stimulates", g);
        }
        for _ in 0..rng.gen_range(1..=2) {
            f.edge(g, "affects", d);
        }
        if rng.gen_bool(0.5) {
            f.edge(p, "associatedWith", &parents[k % parents.len()]);
        }
        truth.push((p.clone(), d.clone()));
    }
    for _ in 0..n_pairs * 6 {
        let a = &proteins[rng.gen_range(0..proteins.len())];
        let b = &genes[rng.gen_range(0..genes.len())];
        let d = &diseases[rng.gen_range(0..diseases.len())];
        match rng.gen_range(0..3) {
            0 => f.edge(a, "coexistsWith", b),
            1 => f.edge(b, "associatedWith", d),
            _ => f.edge(a, "interactsWith", &proteins[rng.gen_range(0..proteins.len())]),
        }
    }
    Ok((f, truth))
}

fn pairs_of(g: &KnowledgeGraph, names: &[(&str, &str)]) -> Result<Vec<Pair>> {
    names
        .iter()
        .map(|(s, o)| Ok((g.require_entity(s)?, g.require_entity(o)?)))
        .collect()
}

/// Paths of the files [`write_fixture`] produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureFiles {
    pub edges: PathBuf,
    pub labels: PathBuf,
    pub confounder_testcase: PathBuf,
    pub random_testcase: PathBuf,
    pub bio_edges: PathBuf,
    pub bio_labels: PathBuf,
    pub bio_testcase: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_fixture_graph(f: &Fixture, edges: &Path, labels: &Path) -> Result<()> {
    let mut w = create(edges)?;
    f.write_edges(&mut w).map_err(|e| Error::io(edges, e))?;
    w.flush().map_err(|e| Error::io(edges, e))?;
    let mut w = create(labels)?;
    f.write_labels(&mut w).map_err(|e| Error::io(labels, e))?;
    w.flush().map_err(|e| Error::io(labels, e))?;
    Ok(())
}

/// Writes both worlds and their 20/80 test cases into `dir`.
pub fn write_fixture(dir: &Path, n_states: usize, seed: u64) -> Result<FixtureFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = FixtureFiles {
        edges: dir.join("capital_edges.tsv"),
        labels: dir.join("capital_labels.tsv"),
        confounder_testcase: dir.join("capital_confounders.tsv"),
        random_testcase: dir.join("capital_random.tsv"),
        bio_edges: dir.join("bio_edges.tsv"),
        bio_labels: dir.join("bio_labels.tsv"),
        bio_testcase: dir.join("bio_random.tsv"),
    };
    let world = capital_world(n_states, seed)?;
    write_fixture_graph(&world.fixture, &files.edges, &files.labels)?;
    let g = world.fixture.graph();
    let truth = pairs_of(&g, &world.capital_pairs())?;
    let confounders = pairs_of(&g, &world.confounder_pairs())?;
    for (path, strategy) in [
        (
            &files.confounder_testcase,
            NegativeStrategy::ConfounderList(confounders),
        ),
        (&files.random_testcase, NegativeStrategy::RandomMatch),
    ] {
        let tc = build_testcase("capitalOf", &truth, &strategy, 0.2, seed)?;
        let mut w = create(path)?;
        write_statements(&g, &tc, &mut w)?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }

    let (bio, bio_truth) = biomedical_world(n_states * 3, seed)?;
    write_fixture_graph(&bio, &files.bio_edges, &files.bio_labels)?;
    let g = bio.graph();
    let names: Vec<(&str, &str)> = bio_truth.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let tc = build_testcase(
        "causes",
        &pairs_of(&g, &names)?,
        &NegativeStrategy::RandomMatch,
        0.2,
        seed,
    )?;
    let mut w = create(&files.bio_testcase)?;
    write_statements(&g, &tc, &mut w)?;
    w.flush().map_err(|e| Error::io(&files.bio_testcase, e))?;
    Ok(files)
}
