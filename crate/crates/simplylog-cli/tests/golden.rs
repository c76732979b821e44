//! End-to-end golden sessions: the shipped corpus driven through the
//! binary, with byte-identical expected outputs and exit codes.

mod common;

use common::corpus_path;
use std::io::Write;
use std::process::{Command, Stdio};

fn run(args: &[&str], stdin: &str) -> (String, String, i32) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_simplylog"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn binary");
    child
        .stdin
        .as_mut()
        .expect("stdin")
        .write_all(stdin.as_bytes())
        .expect("write stdin");
    let out = child.wait_with_output().expect("wait");
    (
        String::from_utf8(out.stdout).expect("utf8 stdout"),
        String::from_utf8(out.stderr).expect("utf8 stderr"),
        out.status.code().expect("exit code"),
    )
}

struct Golden {
    name: &'static str,
    args: Vec<String>,
    stdin: &'static str,
    stdout: &'static str,
    code: i32,
}

fn path(rel: &str) -> String {
    corpus_path(rel).to_str().expect("path").to_string()
}

fn sessions() -> Vec<Golden> {
    let mut list = Vec::new();
    let mut add = |name, args: Vec<String>, stdin, stdout, code| {
        list.push(Golden {
            name,
            args,
            stdin,
            stdout,
            code,
        })
    };
    add(
        "goal-answers",
        vec![
            "--quiet".into(),
            "--consult".into(),
            path("ch1/family.pl"),
            "--goal".into(),
            "grandparent(abraham, X)".into(),
        ],
        "",
        "X = esau\nX = jacob\n",
        0,
    );
    add(
        "goal-failure-exit-1",
        vec![
            "--quiet".into(),
            "--consult".into(),
            path("ch1/family.pl"),
            "--goal".into(),
            "parent(esau, X)".into(),
        ],
        "",
        "false.\n",
        1,
    );
    add(
        "goal-error-exit-2",
        vec![
            "--quiet".into(),
            "--consult".into(),
            path("ch1/family.pl"),
            "--goal".into(),
            "nosuch(a)".into(),
        ],
        "",
        "% error: unknown predicate nosuch/1\n",
        2,
    );
    add(
        "repl-session",
        vec![
            "--quiet".into(),
            "--consult".into(),
            path("ch1/family.pl"),
        ],
        "grandparent(abraham, X).\n;\n;\nancestor(X, joseph).\nhalt.\n",
        "X = esau ;\nX = jacob ;\nfalse.\nX = jacob ;\n",
        0,
    );
    add(
        "sld-tree-text",
        vec![
            "sldtree".into(),
            path("ch3/programming.pl"),
            "--goal".into(),
            "max(3, 5, M)".into(),
            "--depth".into(),
            "5".into(),
        ],
        "",
        ":- max(3,5,M)\n  :- 3>=5, ! [failure]\n  [] [success]\n",
        0,
    );
    add(
        "sld-tree-json",
        vec![
            "sldtree".into(),
            path("ch3/programming.pl"),
            "--goal".into(),
            "max(3, 5, M)".into(),
            "--depth".into(),
            "5".into(),
            "--json".into(),
        ],
        "",
        "{\"children\":[{\"children\":[],\"depth\":1,\"goal\":\":- 3>=5, !\",\"status\":\"failure\"},{\"children\":[],\"depth\":1,\"goal\":\"[]\",\"status\":\"success\"}],\"depth\":0,\"goal\":\":- max(3,5,M)\",\"status\":null}\n",
        0,
    );
    add(
        "proof-tree-text",
        vec![
            "proof".into(),
            path("ch1/family.pl"),
            "--goal".into(),
            "grandparent(abraham, esau)".into(),
        ],
        "",
        "grandparent(abraham,esau) [clause 5]\n  parent(abraham,isaac) [clause 1]\n  parent(isaac,esau) [clause 2]\n",
        0,
    );
    add(
        "proof-tree-json",
        vec![
            "proof".into(),
            path("ch1/family.pl"),
            "--goal".into(),
            "grandparent(abraham, esau)".into(),
            "--json".into(),
        ],
        "",
        "{\"atom\":\"grandparent(abraham,esau)\",\"children\":[{\"atom\":\"parent(abraham,isaac)\",\"children\":[],\"kind\":\"clause 1\"},{\"atom\":\"parent(isaac,esau)\",\"children\":[],\"kind\":\"clause 2\"}],\"kind\":\"clause 5\"}\n",
        0,
    );
    add(
        "least-model",
        vec!["model".into(), path("ch2/model.pl")],
        "",
        "rains. slippery. wet.\n",
        0,
    );
    add(
        "refutation",
        vec!["refute".into(), path("ch2/refute.pl")],
        "",
        "step 1: <2> + <1> on has_wife gives :- married\nstep 2: <3> + <0> on bachelor gives married\nstep 3: <5> + <4> on married gives []\n% unsatisfiable (6 steps)\n",
        0,
    );
    add(
        "completion",
        vec!["complete".into(), path("ch8/naf.pl")],
        "",
        "forall(_X0,iff(bird(_X0),or(equals(_X0,tweety),equals(_X0,opus))))\nforall(_X0,iff(abnormal(_X0),equals(_X0,opus)))\nforall(_X0,iff(can_fly(_X0),and(bird(_X0),not(abnormal(_X0)))))\n",
        0,
    );
    add(
        "search-bfs",
        vec![
            "search".into(),
            path("ch5/maze.graph"),
            "--kind".into(),
            "bfs".into(),
        ],
        "",
        "path: a -> c -> e -> g\ncost: 3\nexpanded=7 generated=9 frontier=3\n",
        0,
    );
    add(
        "search-a-star",
        vec![
            "search".into(),
            path("ch6/route.graph"),
            "--kind".into(),
            "a-star".into(),
        ],
        "",
        "path: s -> a -> b -> c -> g\ncost: 8\nexpanded=5 generated=8 frontier=4\n",
        0,
    );
    add(
        "induction",
        vec!["induce".into(), path("ch9/birds.pl")],
        "",
        "flies(X) :- bird(X).\n",
        0,
    );
    add(
        "abduction",
        vec![
            "abduce".into(),
            path("ch8/diagnosis.pl"),
            "--goal".into(),
            "lamp_off".into(),
        ],
        "",
        "explanation: broken_bulb\n",
        0,
    );
    add(
        "clausal-form",
        vec!["clausify".into(), path("appendix/formula.pl")],
        "",
        "mortal(X) :- human(X).\nmother(sk1(X),X) :- human(X).\n",
        0,
    );
    add(
        "four-port-trace",
        vec![
            "--quiet".into(),
            "--consult".into(),
            path("ch1/family.pl"),
            "--trace".into(),
            "--goal".into(),
            "grandparent(abraham, esau)".into(),
        ],
        "",
        "Call: (1) grandparent(abraham,esau)\nCall: (2) parent(abraham,_G2)\nExit: (2) parent(abraham,ishmael)\nCall: (3) parent(ishmael,esau)\nFail: (3) parent(ishmael,esau)\nRedo: (2) parent(abraham,_G2)\nExit: (2) parent(abraham,isaac)\nCall: (3) parent(isaac,esau)\nExit: (3) parent(isaac,esau)\nExit: (1) grandparent(abraham,esau)\ntrue.\n",
        0,
    );
    add(
        "dcg-parse",
        vec![
            "--quiet".into(),
            "--consult".into(),
            path("ch7/semantics.pl"),
            "--goal".into(),
            "statement(M, [socrates, is, mortal], [])".into(),
        ],
        "",
        "M = fact(mortal,socrates)\n",
        0,
    );
    list
}

#[test]
fn criterion_11_golden_corpus() {
    let start = std::time::Instant::now();
    let mut failures = Vec::new();
    for case in sessions() {
        let args: Vec<&str> = case.args.iter().map(String::as_str).collect();
        let (stdout, stderr, code) = run(&args, case.stdin);
        if stdout != case.stdout {
            failures.push(format!(
                "{}: stdout mismatch\n--- expected ---\n{}--- actual ---\n{}",
                case.name, case.stdout, stdout
            ));
        }
        if code != case.code {
            failures.push(format!(
                "{}: exit code {} != {} (stderr: {})",
                case.name, code, case.code, stderr
            ));
        }
    }
    assert!(start.elapsed().as_secs() < 60, "golden suite too slow");
    if failures.is_empty() {
        println!("acceptance 11 golden-corpus: pass");
    } else {
        println!("acceptance 11 golden-corpus: FAIL");
        panic!("{} golden mismatch(es); first:\n{}", failures.len(), failures[0]);
    }
}
