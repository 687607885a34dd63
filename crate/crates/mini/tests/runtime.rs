use lsq_mini::fixtures::BUCKET;
use lsq_mini::runtime::INITIAL_CAPACITY;
use lsq_mini::*;
use std::sync::Arc;

const DOWN: &str = "
coroutine down(n: Int): Int yields Int {
  var r = 0;
  if (n == 0) {
    yieldval(0);
  } else {
    var m = n - 1;
    r = down(m);
    r = r + 1;
  }
  r
}";

fn compiled(src: &str) -> Arc<CompiledProgram> {
    Arc::new(compile(&parse_mini(src).unwrap(), CompileOptions::default()).unwrap())
}

/// Suspends at the deepest frame of a `depth`-deep recursion.
fn suspended_at_depth(depth: i64) -> Instance {
    let p = compiled(DOWN);
    let mut inst = start_instance(&p, "down", vec![Value::Int(depth)]).unwrap();
    assert!(inst.resume().unwrap());
    inst
}

#[test]
fn deep_recursion_grows_stacks_by_doubling() {
    let mut inst = suspended_at_depth(100);
    assert_eq!(inst.cstack.len(), 101);
    assert_eq!(inst.pstack.len(), 101);
    for hist in [inst.cstack.history(), inst.pstack.history(), inst.vstack.history()] {
        assert_eq!(hist[0], INITIAL_CAPACITY);
        assert!(hist.windows(2).all(|w| w[1] == 2 * w[0]), "{hist:?}");
        assert!(*hist.last().unwrap() >= 128);
    }
    for (work, cap) in [
        (inst.cstack.copy_work(), inst.cstack.capacity()),
        (inst.pstack.copy_work(), inst.pstack.capacity()),
        (inst.vstack.copy_work(), inst.vstack.capacity()),
    ] {
        assert!(work <= 2 * cap, "copy work {work} for capacity {cap}");
    }
    assert!(!inst.resume().unwrap());
    assert_eq!(completion(&inst).unwrap(), Completion::Result(Value::Int(100)));
    assert!(inst.cstack.is_empty());
}

#[test]
fn host_depth_does_not_depend_on_call_depth() {
    let shallow = suspended_at_depth(1).max_host_depth();
    let deep = suspended_at_depth(100).max_host_depth();
    assert_eq!(shallow, deep);
}

#[test]
fn snapshot_continues_like_the_original() {
    let p = compiled(BUCKET);
    let list = Value::int_list(&[3, 1, 4, 1, 5]);
    let mut inst = start_instance(&p, "bucket", vec![list]).unwrap();
    assert!(inst.resume().unwrap());
    assert!(inst.resume().unwrap());
    let mut copy = snapshot_instance(&inst);
    let rest = |i: &mut Instance| {
        let mut out = Vec::new();
        while i.resume().unwrap() {
            out.push(read_value(i).unwrap());
        }
        out
    };
    let a = rest(&mut inst);
    let b = rest(&mut copy);
    assert_eq!(a, b);
    assert_eq!(a, vec![Value::Int(4), Value::Int(1), Value::Int(5)]);
    assert_eq!(resume_instance(&mut copy), Err(MiniError::ResumeOnDead));
}

#[test]
fn short_circuit_normalizes_to_a_branch() {
    let prog = parse_mini("coroutine c(a: Bool, b: Bool): Bool yields Int { a || b }").unwrap();
    let expected = parse_mini(
        "coroutine c(a: Bool, b: Bool): Bool yields Int {
           var x_0;
           if (a) { x_0 = true; } else { x_0 = b; }
           x_0
         }",
    )
    .unwrap();
    let got = normalize(&prog);
    assert_eq!(got, expected, "\n{got}");
}

#[test]
fn literal_result_is_unchanged() {
    let prog = parse_mini("coroutine c(): Int yields Int { 7 }").unwrap();
    assert_eq!(normalize(&prog), prog);
}

#[test]
fn branch_with_yield_has_one_of_each_control_node() {
    let p = compiled("coroutine c(a: Bool): Int yields Int { if (a) { yieldval(1); } else { } 0 }");
    let counts = p.get("c").unwrap().cfg.control_counts();
    let pairs: Vec<(&str, usize)> = counts.into_iter().collect();
    assert_eq!(pairs, vec![("Ie", 1), ("Is", 1), ("Y", 1)]);
}

#[test]
fn loop_header_dominates_its_body() {
    let p = compiled(BUCKET);
    let cfg = &p.get("bucket").unwrap().cfg;
    let ws = cfg.nodes.iter().position(|n| n.kind.tag() == "Ws").unwrap();
    let y = cfg.nodes.iter().position(|n| n.kind.tag() == "Y").unwrap();
    let ret = cfg.nodes.iter().position(|n| n.kind.tag() == "return").unwrap();
    assert!(dominates(cfg, 0, ret));
    assert!(dominates(cfg, ws, y));
    assert!(dominates(cfg, ws, ret));
    assert!(!dominates(cfg, y, ret));
}
