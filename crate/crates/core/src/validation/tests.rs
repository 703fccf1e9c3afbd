use super::*;
use crate::kb::{load_kb, Profile};

fn iri(text: &str) -> Iri {
    Profile::wikidata().prefixes.expand_iri(&Profile::dbpedia().prefixes.expand(text)).unwrap()
}

fn store(profile: Profile, nt: &str) -> KbStore {
    load_kb(nt.as_bytes(), None::<&[u8]>, profile).unwrap()
}

fn dbp(nt: &str) -> KbStore {
    store(Profile::dbpedia(), nt)
}

fn linked(question: &str, mentions: &[(&str, &str)]) -> Vec<LinkedEntity> {
    mentions
        .iter()
        .map(|(mention, target)| {
            let byte = question.find(mention).unwrap();
            let start = question[..byte].chars().count();
            LinkedEntity::new(question, start, start + mention.chars().count(), iri(target)).unwrap()
        })
        .collect()
}

fn beams(texts: &[&str]) -> Vec<OutputSequence> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| OutputSequence { text: t.to_string(), score: -(i as f64), rank: i + 1 })
        .collect()
}

const FIG1: &str = "\
<dbr:Ford_Kansas_City_Assembly_Plant> <dbo:owningOrganisation> <dbr:Ford_Motor_Company> .
<dbr:Ford_Kansas_City_Assembly_Plant> <dbp:owningOrganisation> <dbr:Ford_Motor_Company> .
<dbr:Ford_Y-block_engine> <dbo:manufacturer> <dbr:Ford_Motor_Company> .
<dbr:Ford_Y-block_engine> <dbp:manufacturer> <dbr:Ford_Motor_Company> .
<dbr:Ford_Kansas_City_Assembly_Plant> <dbo:location> <dbr:Claycomo,_Missouri> .
";

const FIG1_Q: &str =
    "What is the company that owns Ford Kansas City Assembly Plant and manufactures Ford Y-block engine?";

fn fig1_entities() -> Vec<LinkedEntity> {
    linked(
        FIG1_Q,
        &[
            ("Ford Kansas City Assembly Plant", "dbr:Ford_Kansas_City_Assembly_Plant"),
            ("Ford Y-block engine", "dbr:Ford_Y-block_engine"),
        ],
    )
}

#[test]
fn entity_expansion_both_namespaces_gives_four() {
    let kb = dbp(FIG1);
    let plant = iri("dbr:Ford_Kansas_City_Assembly_Plant");
    let alts = expand_entity_relation(&kb, &plant, "owningOrganisation", 0);
    let x = PatternTerm::Var(Variable::x());
    let e = PatternTerm::iri(&plant);
    let expected: Vec<TriplePattern> = ["dbo:owningOrganisation", "dbp:owningOrganisation"]
        .iter()
        .flat_map(|r| {
            [
                TriplePattern::new(e.clone(), iri(r), x.clone()),
                TriplePattern::new(x.clone(), iri(r), e.clone()),
            ]
        })
        .collect();
    let got: Vec<TriplePattern> = alts.iter().flat_map(|a| a.patterns.clone()).collect();
    assert_eq!(got, expected);
}

#[test]
fn entity_expansion_single_namespace_gives_two() {
    let kb = dbp(FIG1);
    let alts = expand_entity_relation(&kb, &iri("dbr:Ford_Kansas_City_Assembly_Plant"), "location", 0);
    assert_eq!(alts.len(), 2);
    assert!(alts.iter().all(|a| a.relation == iri("dbo:location")));
}

#[test]
fn unknown_label_expands_to_nothing() {
    let kb = dbp(FIG1);
    assert!(expand_entity_relation(&kb, &iri("dbr:Ford_Y-block_engine"), "spouse", 0).is_empty());
    assert!(expand_placeholder_relation(&kb, "spouse", 0).is_empty());
}

#[test]
fn placeholder_expansion_uses_y() {
    let kb = dbp("<dbr:a> <dbo:owner> <dbr:b> .\n<dbr:c> <dbp:owner> <dbr:d> .\n");
    let alts = expand_placeholder_relation(&kb, "owner", 0);
    assert_eq!(alts.len(), 4);
    let y = PatternTerm::Var(Variable::y());
    let x = PatternTerm::Var(Variable::x());
    assert_eq!(alts[0].patterns, vec![TriplePattern::new(y.clone(), iri("dbo:owner"), x.clone())]);
    assert_eq!(alts[1].patterns, vec![TriplePattern::new(x, iri("dbo:owner"), y)]);
}

#[test]
fn product_of_two_full_pairs_is_sixteen() {
    // Every orientation holds, so nothing is pruned.
    let kb = dbp("<dbr:a> <dbo:r> <dbr:a> .\n<dbr:a> <dbp:r> <dbr:a> .\n<dbr:a> <dbo:s> <dbr:a> .\n<dbr:a> <dbp:s> <dbr:a> .\n");
    let a = PatternTerm::iri(&iri("dbr:a"));
    let stream = enumerate_graphs(&kb, &[(a.clone(), "r".into()), (a, "s".into())]);
    assert_eq!(stream.size(), 16);
    let graphs: Vec<_> = stream.collect();
    assert_eq!(graphs.len(), 16);
    assert_eq!(graphs[0].choice_indices, vec![0, 0]);
    assert_eq!(graphs[1].choice_indices, vec![0, 1]);
    assert_eq!(graphs[15].choice_indices, vec![3, 3]);
}

#[test]
fn single_survivor_gives_one_graph() {
    let kb = dbp("<dbr:a> <dbo:r> <dbr:b> .\n");
    let graphs: Vec<_> = enumerate_graphs(&kb, &[(PatternTerm::iri(&iri("dbr:a")), "r".into())]).collect();
    assert_eq!(graphs.len(), 1);
    assert_eq!(graphs[0].choice_indices, vec![0]);
}

#[test]
fn fully_pruned_pair_empties_the_stream() {
    let kb = dbp("<dbr:a> <dbo:r> <dbr:b> .\n<dbr:c> <dbo:s> <dbr:d> .\n");
    let a = PatternTerm::iri(&iri("dbr:a"));
    let stream = enumerate_graphs(&kb, &[(a.clone(), "r".into()), (a, "s".into())]);
    assert_eq!(stream.size(), 0);
    assert_eq!(stream.count(), 0);
}

#[test]
fn two_pair_sequence_validates() {
    let kb = dbp(FIG1);
    let seq = &beams(&["[Ford Kansas City Assembly Plant | owningOrganisation], [Ford Y-block engine | manufacturer]"])[0];
    let result = validate_sequence(&kb, seq, &fig1_entities(), &WhLexicon::default()).unwrap();
    assert!(result.validated);
    assert_eq!(result.relations, vec![iri("dbo:owningOrganisation"), iri("dbo:manufacturer")]);
    let (graph, binding) = result.witness.unwrap();
    assert_eq!(graph.choice_indices, vec![0, 0]);
    assert_eq!(binding[&Variable::x()], crate::kb::Term::Iri(iri("dbr:Ford_Motor_Company")));
}

#[test]
fn no_matching_graph_is_none() {
    let kb = dbp(FIG1);
    let seq = &beams(&["[Ford Kansas City Assembly Plant | location], [Ford Y-block engine | manufacturer]"])[0];
    assert!(validate_sequence(&kb, seq, &fig1_entities(), &WhLexicon::default()).is_none());
}

#[test]
fn unresolved_argument_is_none() {
    let kb = dbp(FIG1);
    let seq = &beams(&["[Chrysler | manufacturer]"])[0];
    assert!(validate_sequence(&kb, seq, &fig1_entities(), &WhLexicon::default()).is_none());
}

#[test]
fn later_graph_wins_when_first_fails_join() {
    // pair 0: (e1 a ?x) gives m1, (?x a e1) gives m2; pair 1 only has (e2 b m2).
    let kb = dbp("<dbr:e1> <dbo:a> <dbr:m1> .\n<dbr:m2> <dbo:a> <dbr:e1> .\n<dbr:e2> <dbo:b> <dbr:m2> .\n");
    let q = "which thing links e1 and e2";
    let entities = linked(q, &[("e1", "dbr:e1"), ("e2", "dbr:e2")]);
    let seq = &beams(&["[e1 | a], [e2 | b]"])[0];
    let result = validate_sequence(&kb, seq, &entities, &WhLexicon::default()).unwrap();
    let (graph, _) = result.witness.unwrap();
    assert_eq!(graph.choice_indices, vec![1, 0]);
    assert_eq!(result.relations, vec![iri("dbo:a"), iri("dbo:b")]);
}

#[test]
fn link_skips_invalid_rank_one() {
    let kb = dbp(FIG1);
    let result = link(
        &kb,
        FIG1_Q,
        &beams(&[
            "[Ford Kansas City Assembly Plant | location], [Ford Y-block engine | manufacturer]",
            "[Ford Kansas City Assembly Plant | owningOrganisation], [Ford Y-block engine | manufacturer]",
        ]),
        &fig1_entities(),
        &LinkConfig::default(),
    );
    assert!(result.validated);
    assert_eq!(result.source_rank, Some(2));
    assert_eq!(result.relations, vec![iri("dbo:owningOrganisation"), iri("dbo:manufacturer")]);
}

#[test]
fn link_falls_back_to_top_beam_preferring_ontology() {
    let kb = dbp(FIG1);
    let result = link(
        &kb,
        FIG1_Q,
        &beams(&["not a sequence", "[Ford Y-block engine | owningOrganisation], [Ford Y-block engine | spouse]"]),
        &fig1_entities(),
        &LinkConfig::default(),
    );
    assert!(!result.validated);
    assert_eq!(result.source_rank, Some(2));
    assert_eq!(result.relations, vec![iri("dbo:owningOrganisation")]);
}

#[test]
fn link_respects_beam_limit() {
    let kb = dbp(FIG1);
    let config = LinkConfig { beam_limit: 1, ..LinkConfig::default() };
    let result = link(
        &kb,
        FIG1_Q,
        &beams(&[
            "[Ford Y-block engine | location]",
            "[Ford Kansas City Assembly Plant | owningOrganisation], [Ford Y-block engine | manufacturer]",
        ]),
        &fig1_entities(),
        &config,
    );
    assert!(!result.validated);
    assert_eq!(result.source_rank, Some(1));
    assert_eq!(result.relations, vec![iri("dbo:location")]);
}

#[test]
fn empty_beams_give_empty_result() {
    let kb = dbp(FIG1);
    let result = link(&kb, FIG1_Q, &[], &fig1_entities(), &LinkConfig::default());
    assert_eq!(result, LinkingResult::empty());
}

const OBAMA_Q: &str = "Was Barack Obama president of Canada?";

fn obama_entities() -> Vec<LinkedEntity> {
    linked(OBAMA_Q, &[("Barack Obama", "dbr:Barack_Obama"), ("Canada", "dbr:Canada")])
}

#[test]
fn ask_without_bound_triple_is_false() {
    let kb = dbp("<dbr:Barack_Obama> <dbo:president> <dbr:United_States> .\n<dbr:Justin_Trudeau> <dbo:primeMinister> <dbr:Canada> .\n");
    let result = link(
        &kb,
        OBAMA_Q,
        &beams(&["[Barack Obama | president], [Canada | president]", "[Barack Obama | primeMinister], [Canada | primeMinister]"]),
        &obama_entities(),
        &LinkConfig::default(),
    );
    assert_eq!(result.ask_answer, Some(false));
    assert!(!result.validated);
    assert_eq!(result.source_rank, Some(1));
    assert_eq!(result.relations, vec![iri("dbo:president")]);
}

#[test]
fn ask_with_reversed_bound_triple_is_true() {
    let kb = dbp("<dbr:Canada> <dbp:president> <dbr:Barack_Obama> .\n");
    let result = link(
        &kb,
        OBAMA_Q,
        &beams(&["[Barack Obama | leader], [Canada | leader]", "[Barack Obama | president], [Canada | president]"]),
        &obama_entities(),
        &LinkConfig::default(),
    );
    assert_eq!(result.ask_answer, Some(true));
    assert!(result.validated);
    assert_eq!(result.source_rank, Some(2));
    assert_eq!(result.relations, vec![iri("dbp:president")]);
}

#[test]
fn ask_ignores_beams_past_the_limit() {
    let kb = dbp("<dbr:Barack_Obama> <dbo:president> <dbr:Canada> .\n");
    let mut texts = vec!["[Barack Obama | spouse], [Canada | spouse]"; 10];
    texts.push("[Barack Obama | president], [Canada | president]");
    let result = link(&kb, OBAMA_Q, &beams(&texts), &obama_entities(), &LinkConfig::default());
    assert_eq!(result.ask_answer, Some(false));
}

const WD: &str = "\
<wd:Q1> <p:P176> <wds:Q1-s1> .
<wds:Q1-s1> <ps:P176> <wd:Q2> .
<wds:Q1-s1> <pq:P580> \"1954\" .
<wd:Q1> <wdt:P31> <wd:Q3> .
<wd:Q3> <wdt:P279> <wd:Q4> .
<wd:Q1> <p:P31> <wds:Q1-s2> .
<wds:Q1-s2> <ps:P31> <wd:Q3> .
";

const WD_LABELS: &str = "label\twd:P176\tmanufacturer\nlabel\twd:P31\tinstance of\nlabel\twd:P580\tstart time\n";

fn wd() -> KbStore {
    load_kb(WD.as_bytes(), Some(WD_LABELS.as_bytes()), Profile::wikidata()).unwrap()
}

#[test]
fn wikidata_statement_path_validates() {
    let kb = wd();
    let q = "Who manufactured Y-block?";
    let entities = linked(q, &[("Y-block", "wd:Q1")]);
    let seq = &beams(&["[Y-block | manufacturer]"])[0];
    let result = validate_sequence(&kb, seq, &entities, &WhLexicon::default()).unwrap();
    assert_eq!(result.relations, vec![iri("p:P176")]);
    let (graph, binding) = result.witness.unwrap();
    assert_eq!(
        graph.patterns(),
        vec![
            TriplePattern::new(PatternTerm::iri(&iri("wd:Q1")), iri("p:P176"), PatternTerm::Var(Variable::statement(0))),
            TriplePattern::new(PatternTerm::Var(Variable::statement(0)), iri("ps:P176"), PatternTerm::Var(Variable::x())),
        ]
    );
    assert_eq!(binding[&Variable::x()], crate::kb::Term::Iri(iri("wd:Q2")));
}

#[test]
fn instance_of_is_direct_only() {
    let kb = wd();
    let alts = expand_entity_relation(&kb, &iri("wd:Q1"), "instance of", 0);
    assert_eq!(alts.len(), 2);
    assert!(alts.iter().all(|a| a.relation == iri("wdt:P31") && a.patterns.len() == 1));
}

#[test]
fn qualifier_paths_go_through_host_claims() {
    let kb = wd();
    let alts = expand_entity_relation(&kb, &iri("wd:Q1"), "start time", 3);
    assert_eq!(alts.len(), 2);
    let s = PatternTerm::Var(Variable::statement(3));
    assert_eq!(
        alts[0].patterns,
        vec![
            TriplePattern::new(PatternTerm::iri(&iri("wd:Q1")), iri("p:P176"), s.clone()),
            TriplePattern::new(s, iri("pq:P580"), PatternTerm::Var(Variable::x())),
        ]
    );
    assert_eq!(alts[0].relation, iri("pq:P580"));
    assert!(kb.is_satisfiable(&alts[0].patterns));
}

#[test]
fn wikidata_fallback_prefers_direct() {
    let kb = wd();
    let q = "What is Y-block an instance of?";
    let entities = linked(q, &[("Y-block", "wd:Q1")]);
    let result = link(&kb, q, &beams(&["[Nothing | instance of]"]), &entities, &LinkConfig::default());
    assert!(!result.validated);
    assert_eq!(result.relations, vec![iri("wdt:P31")]);
}
