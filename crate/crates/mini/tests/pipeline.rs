use lsq_mini::fixtures::{BUCKET, EXCEPTIONS, HASHTABLE, UNCAUGHT};
use lsq_mini::*;
use std::collections::BTreeSet;
use std::sync::Arc;

fn compiled(src: &str, optimize: bool) -> Arc<CompiledProgram> {
    Arc::new(compile(&parse_mini(src).unwrap(), CompileOptions { optimize }).unwrap())
}

fn names(c: &CompiledCoroutine, vs: &BTreeSet<usize>) -> Vec<String> {
    vs.iter().map(|&v| c.resolved.var_names[v].clone()).collect()
}

#[test]
fn bucket_canonical_form() {
    let prog = normalize(&parse_mini(BUCKET).unwrap());
    let expected = parse_mini(
        "coroutine bucket(b: List[Int]): Unit yields Int {
           var x_0 = b != nil;
           var x_1 = x_0;
           while (x_1) {
             var x_2 = b.head;
             var x_3 = yieldval(x_2);
             var x_4 = b.tail;
             b = x_4;
             var x_0 = b != nil;
             x_1 = x_0;
           }
         }",
    )
    .unwrap();
    assert_eq!(prog, expected, "\n{prog}");
    assert!(is_restricted(&prog));
}

#[test]
fn bucket_segments_match_the_reference_split() {
    let p = compiled(BUCKET, true);
    let c = p.get("bucket").unwrap();
    assert_eq!(c.segments.len(), 2);
    let tags = |cfg: &Cfg| -> Vec<&str> { cfg.nodes.iter().map(|n| n.kind.tag()).collect() };
    assert_eq!(
        tags(&c.cfg),
        ["entry", "stmt", "stmt", "Ws", "stmt", "Y", "stmt", "stmt", "stmt", "stmt", "We", "return"]
    );
    assert_eq!(
        tags(&c.segment_cfgs[0]),
        ["entry", "stmt", "stmt", "Ws", "stmt", "Y", "We", "return"]
    );
    assert_eq!(
        tags(&c.segment_cfgs[1]),
        ["entry", "Bs", "stmt", "stmt", "stmt", "stmt", "Be", "Ws", "stmt", "Y", "We", "return"]
    );
    let counts = c.segment_cfgs[0].control_counts();
    assert_eq!(counts.into_iter().collect::<Vec<_>>(), [("We", 1), ("Ws", 1), ("Y", 1)]);
    assert_eq!(c.segments[1].kind, EntryKind::AfterYield);

    assert_eq!(names(c, &c.report.loads[0]), ["b"]);
    assert_eq!(names(c, &c.report.loads[1]), ["b"]);
    assert_eq!(c.report.stores[0][0], BTreeSet::new());
    assert_eq!(names(c, &c.report.stores[1][0]), ["b"]);
}

#[test]
fn bucket_runs() {
    let p = compiled(BUCKET, true);
    let mut i = start_instance(&p, "bucket", vec![Value::int_list(&[1, 2, 3])]).unwrap();
    let mut seen = Vec::new();
    while resume_instance(&mut i).unwrap() {
        seen.push(read_value(&i).unwrap());
    }
    assert_eq!(seen, [Value::Int(1), Value::Int(2), Value::Int(3)]);
    assert_eq!(read_result(&i).unwrap(), Value::Unit);
    assert_eq!(resume_instance(&mut i), Err(MiniError::ResumeOnDead));
    assert_eq!(read_exception(&i), Err(MiniError::FieldUnset("exception")));
}

#[test]
fn hashtable_calls_bucket() {
    let prog = parse_mini(HASHTABLE).unwrap();
    let table = parse_value("[[1], [], [2, 3]]").unwrap();
    for optimize in [true, false] {
        let p = compiled(HASHTABLE, optimize);
        let out = run_compiled(&p, "hashtable", vec![table.clone()], 10_000).unwrap();
        assert_eq!(
            out,
            direct_run(&prog, "hashtable", vec![table.clone()], 10_000).unwrap()
        );
        assert_eq!(out.yields, [Value::Int(1), Value::Int(2), Value::Int(3)]);
    }
    let p = compiled(HASHTABLE, true);
    let h = p.get("hashtable").unwrap();
    assert!(h
        .entries
        .iter()
        .any(|e| e.kind == EntryKind::AfterCall && e.unwind_handler));
}

#[test]
fn exception_through_two_frames_is_caught() {
    let p = compiled(EXCEPTIONS, true);
    let fail = p.get("fail").unwrap();
    assert_eq!(fail.entries.len(), 1);
    assert!(matches!(fail.entries[0].exits[0].kind, ExitKind::Throw(_)));
    let forward = p.get("forward").unwrap();
    assert!(forward.entries[1].unwind_handler);
    let main = p.get("main").unwrap();
    let after_call = main.entries.iter().find(|e| e.kind == EntryKind::AfterCall).unwrap();
    assert!(after_call.unwind_handler && after_call.user_handler_replica);

    let mut i = start_instance(&p, "main", vec![]).unwrap();
    assert!(resume_instance(&mut i).unwrap());
    assert_eq!(read_value(&i).unwrap(), Value::Int(107));
    assert!(!resume_instance(&mut i).unwrap());
    assert_eq!(read_result(&i).unwrap(), Value::Int(107));
}

#[test]
fn uncaught_exception_terminates_instance() {
    let p = compiled(UNCAUGHT, true);
    let mut i = start_instance(&p, "main", vec![]).unwrap();
    assert!(resume_instance(&mut i).unwrap());
    assert!(!resume_instance(&mut i).unwrap());
    assert_eq!(read_exception(&i).unwrap(), Value::Int(7));
    assert_eq!(read_result(&i), Err(MiniError::FieldUnset("result")));
    assert!(!i.is_live());
}

#[test]
fn snapshot_resumes_independently() {
    let p = compiled(BUCKET, true);
    let mut i = start_instance(&p, "bucket", vec![Value::int_list(&[1, 2, 3])]).unwrap();
    resume_instance(&mut i).unwrap();
    let mut j = snapshot_instance(&i);
    resume_instance(&mut i).unwrap();
    resume_instance(&mut i).unwrap();
    assert_eq!(read_value(&i).unwrap(), Value::Int(3));
    resume_instance(&mut j).unwrap();
    assert_eq!(read_value(&j).unwrap(), Value::Int(2));
}

#[test]
fn arity_and_unknown_names_are_errors() {
    let p = compiled(BUCKET, true);
    assert!(matches!(
        start_instance(&p, "bucket", vec![]),
        Err(MiniError::Arity { .. })
    ));
    assert!(matches!(
        start_instance(&p, "nope", vec![]),
        Err(MiniError::UnknownCoroutine(_))
    ));
    let bad = parse_mini("coroutine f(): Unit yields Int { g(1); }").unwrap();
    assert!(matches!(
        compile(&bad, CompileOptions::default()),
        Err(MiniError::UnknownCoroutine(_))
    ));
}
