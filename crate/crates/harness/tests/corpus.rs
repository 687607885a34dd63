mod common;

use lsq_harness::corpus::load_corpus;

#[test]
fn every_corpus_program_agrees_with_its_transform() {
    let corpus = load_corpus().unwrap();
    assert!(corpus.len() >= 10, "only {} corpus programs", corpus.len());
    let errors: Vec<String> = corpus
        .iter()
        .filter_map(|p| common::check_corpus_program(p).err())
        .collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

#[test]
fn drivers_compute_the_listed_values() {
    let corpus = load_corpus().unwrap();
    let expect = |name: &str| corpus.iter().find(|p| p.name == name).unwrap().expect.clone();
    assert_eq!(expect("dup-driver"), "14");
    assert_eq!(expect("rep-driver"), "77");
}

#[test]
fn coroutine_free_programs_exist() {
    let corpus = load_corpus().unwrap();
    let plain = corpus
        .iter()
        .filter(|p| common::plain_image(&common::parse(&p.text)).is_some())
        .count();
    assert!(plain >= 3, "{plain} coroutine-free programs");
}
