mod common;

use calcdev::api::{Api, Response};
use serde_json::{json, Value};

const INIT: &str = "init4{vars=[x: Int, p: Bool], pre=true, post=p \\Rightarrow x = 3}";

fn api() -> Api {
    Api::new(common::oracle())
}

fn post(api: &Api, target: &str, body: Value) -> Response {
    api.handle("POST", target, &body.to_string())
}

fn get(api: &Api, target: &str) -> Response {
    api.handle("GET", target, "")
}

fn tactic(api: &Api, id: &str, text: &str) -> Response {
    post(api, &format!("/sessions/{id}/tactic"), json!({ "tactic": text }))
}

fn new_session(api: &Api) -> String {
    let r = post(api, "/sessions", json!({}));
    assert_eq!(r.status, 201);
    r.body["id"].as_str().unwrap().to_string()
}

fn kind(r: &Response) -> &str {
    r.body["error"]["kind"].as_str().unwrap_or("")
}

#[test]
fn init_then_guess_completes() {
    let api = api();
    let id = new_session(&api);
    let r = tactic(&api, &id, INIT);
    assert_eq!(r.status, 200, "{}", r.body);
    assert_eq!(r.body["node"], 1);
    assert_eq!(r.body["view"]["mode"], "program");
    assert_eq!(r.body["active_path"].as_array().unwrap().len(), 2);
    let r = tactic(&api, &id, "guessProgram{prog=\"x := 3\"}");
    assert_eq!(r.status, 200, "{}", r.body);
    assert_eq!(r.body["view"]["complete"], true);
    let sessions = get(&api, "/sessions");
    assert_eq!(sessions.body["sessions"], json!([id]));
}

#[test]
fn node_views_and_obligations() {
    let api = api();
    let id = new_session(&api);
    tactic(&api, &id, INIT);
    let full = get(&api, &format!("/sessions/{id}/node/1?view=full"));
    assert_eq!(full.status, 200);
    assert_eq!(full.body["program"]["kind"], "UnkProg");
    assert_eq!(full.body["declarations"]["vars"][0]["name"], "x");
    let minimal = get(&api, &format!("/sessions/{id}/node/1?view=minimal"));
    assert_eq!(minimal.body["view"], "minimal");
    assert_eq!(get(&api, &format!("/sessions/{id}/node/1?view=sideways")).status, 400);
    assert_eq!(get(&api, &format!("/sessions/{id}/node/x")).status, 400);
    assert_eq!(kind(&get(&api, &format!("/sessions/{id}/node/9"))), "unknown-node");

    let label = full.body["obligations"][0]["label"].as_str().unwrap().to_string();
    let o = get(&api, &format!("/sessions/{id}/obligations/{label}"));
    assert_eq!(o.status, 200, "{}", o.body);
    assert_eq!(o.body["label"], label.as_str());
    let o = get(&api, &format!("/sessions/{id}/obligations/Nothing?node=1"));
    assert_eq!((o.status, kind(&o)), (404, "no-such-obligation"));
}

#[test]
fn tactic_registry_marks_applicable_entries() {
    let api = api();
    let id = new_session(&api);
    let r = get(&api, &format!("/sessions/{id}/tactics"));
    assert_eq!(r.status, 200);
    let tactics = r.body["tactics"].as_array().unwrap();
    let applicable: Vec<&str> = tactics
        .iter()
        .filter(|t| t["applicable"] == true)
        .map(|t| t["name"].as_str().unwrap())
        .collect();
    assert_eq!(applicable, ["init4"]);
    tactic(&api, &id, INIT);
    let r = get(&api, &format!("/sessions/{id}/tactics"));
    assert_eq!(r.body["mode"], "program");
    assert!(r.body["tactics"].as_array().unwrap().iter().any(|t| t["name"] == "guessProgram" && t["applicable"] == true));
}

#[test]
fn errors_have_statuses_and_kinds() {
    let api = api();
    assert_eq!(kind(&get(&api, "/sessions/none/tree")), "unknown-session");
    assert_eq!(get(&api, "/elsewhere").status, 404);
    let id = new_session(&api);
    assert_eq!(api.handle("POST", &format!("/sessions/{id}/tactic"), "{not json").status, 400);
    let r = tactic(&api, &id, "init4{vars=[x: Int");
    assert_eq!((r.status, kind(&r)), (400, "syntax"));
    let r = tactic(&api, &id, "noSuchTactic{}");
    assert_eq!((r.status, kind(&r)), (400, "unknown-tactic"));
    let r = tactic(&api, &id, "guessProgram{prog=\"x := 3\"}");
    assert_eq!((r.status, kind(&r)), (422, "wrong-mode"));
    tactic(&api, &id, INIT);
    let r = tactic(&api, &id, "guessProgram{prog=\"x := 4\"}");
    assert_eq!((r.status, kind(&r)), (422, "side-condition-failed"));
    assert!(r.body["error"]["counterexample"].is_object(), "{}", r.body);
    let r = post(&api, &format!("/sessions/{id}/navigate"), json!({"node": 42}));
    assert_eq!((r.status, kind(&r)), (404, "unknown-node"));
    let tree = get(&api, &format!("/sessions/{id}/tree"));
    assert_eq!(tree.body["nodes"].as_array().unwrap().len(), 2);
}

#[test]
fn busy_session_rejects_requests() {
    let api = api();
    let id = new_session(&api);
    let s = api.session(&id).unwrap();
    let guard = s.write().unwrap();
    let r = tactic(&api, &id, INIT);
    assert_eq!((r.status, kind(&r)), (409, "busy"));
    assert_eq!(get(&api, &format!("/sessions/{id}/tree")).status, 409);
    drop(guard);
    let reader = s.read().unwrap();
    // Readers share the session; a writer is turned away.
    assert_eq!(get(&api, &format!("/sessions/{id}/tree")).status, 200);
    assert_eq!(tactic(&api, &id, INIT).status, 409);
    drop(reader);
    assert_eq!(tactic(&api, &id, INIT).status, 200);
}

#[test]
fn navigate_to_sibling_takes_the_newest_branch() {
    let api = api();
    let id = new_session(&api);
    tactic(&api, &id, INIT);
    let assign = "introAssignment{targets=[x], exprs=[x']}";
    let into = "stepInto{label=Program.postcondition}";
    for (at, t) in [(1, assign), (1, assign), (2, into), (2, into)] {
        let r = post(&api, &format!("/sessions/{id}/tactic"), json!({"tactic": t, "node": at}));
        assert_eq!(r.status, 200, "{}", r.body);
    }
    // 0 - 1 - {2 - {4, 5}, 3}; active is 5.
    let r = post(&api, &format!("/sessions/{id}/navigate"), json!({"node": 3}));
    assert_eq!(r.body["active"], 3);
    let r = post(&api, &format!("/sessions/{id}/navigate"), json!({"node": 2}));
    assert_eq!(r.status, 200);
    assert_eq!(r.body["active"], 5);
    let path: Vec<u64> = r.body["active_path"].as_array().unwrap().iter().map(|e| e["id"].as_u64().unwrap()).collect();
    assert_eq!(path, [0, 1, 2, 5]);
    assert_eq!(r.body["active_path"][3]["siblings"], json!([4]));
    assert_eq!(r.body["view"]["id"], 5);
    let r = post(&api, &format!("/sessions/{id}/navigate"), json!({"node": 1}));
    assert_eq!(r.body["active"], 1);
}

#[test]
fn focus_on_a_consequent_assumes_the_antecedent() {
    let api = api();
    let id = new_session(&api);
    for t in [INIT, "introAssignment{targets=[x], exprs=[x']}", "stepInto{label=Program.postcondition}", "focus{path=@1}"] {
        let r = tactic(&api, &id, t);
        assert_eq!(r.status, 200, "{t}: {}", r.body);
    }
    let view = get(&api, &format!("/sessions/{id}/node/4")).body;
    let frames = view["calculation"]["frames"].as_array().unwrap();
    assert_eq!(frames.len(), 2);
    assert_eq!(frames[1]["assumptions"], json!(["p"]));
    assert_eq!(frames[1]["current"]["text"], "x' = 3");
}

#[test]
fn save_and_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.json");
    let api = api();
    let id = new_session(&api);
    tactic(&api, &id, INIT);
    tactic(&api, &id, "guessProgram{prog=\"x := 3\"}");
    let r = post(&api, &format!("/sessions/{id}/save"), json!({"path": file}));
    assert_eq!(r.status, 200, "{}", r.body);
    let doc = get(&api, &format!("/sessions/{id}/document")).body;
    assert_eq!(doc["format"], "calcdev-derivation");

    let other = new_session(&api);
    let r = post(&api, &format!("/sessions/{other}/load"), json!({"path": file}));
    assert_eq!(r.status, 200, "{}", r.body);
    assert_eq!(r.body["active"], 2);
    assert_eq!(r.body["view"]["complete"], true);
    assert_eq!(get(&api, &format!("/sessions/{other}/document")).body, doc);

    let third = new_session(&api);
    let r = post(&api, &format!("/sessions/{third}/load"), json!({"document": doc, "trust": true}));
    assert_eq!(r.status, 200, "{}", r.body);

    let mut bad = doc.clone();
    bad["format"] = json!("other");
    let r = post(&api, &format!("/sessions/{third}/load"), json!({"document": bad}));
    assert_eq!(r.status, 400);
    let r = post(&api, &format!("/sessions/{third}/load"), json!({}));
    assert_eq!(r.status, 400);
    bad["format"] = doc["format"].clone();
    bad["nodes"] = json!([]);
    let r = post(&api, &format!("/sessions/{third}/load"), json!({"document": bad}));
    assert_eq!((r.status, kind(&r)), (400, "format"));
    let r = post(&api, &format!("/sessions/{third}/load"), json!({"path": dir.path().join("missing.json")}));
    assert_eq!((r.status, kind(&r)), (400, "io"));
}
