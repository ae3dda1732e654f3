use std::time::Duration;

use futures_util::StreamExt;
use memswitch_core::topology::preset;
use memswitch_core::ControllerConfig;
use memswitch_host::{connect, serve_api, ApiServer, Endpoint, SessionOptions};
use memswitch_sim::{serve_virtual_serial, DeviceConfig, ServeOptions, SimRig, VirtualSerialServer};
use serde_json::{json, Value};

async fn stack(extensions: bool) -> (VirtualSerialServer, ApiServer, String) {
    let config = ControllerConfig { extensions, ..ControllerConfig::default() };
    let rig = SimRig::new(preset("sp9t-custom").unwrap(), &DeviceConfig::default(), config).unwrap();
    let sim = serve_virtual_serial(rig, "127.0.0.1:0", ServeOptions::default()).unwrap();
    let ep = Endpoint::Network(sim.local_addr().to_string());
    let session = tokio::task::spawn_blocking(move || {
        connect(&ep, &preset("sp9t-custom").unwrap(), SessionOptions::default()).unwrap()
    })
    .await
    .unwrap();
    let api = serve_api(session, "127.0.0.1:0").await.unwrap();
    let base = format!("http://{}", api.local_addr());
    (sim, api, base)
}

async fn state(client: &reqwest::Client, base: &str) -> Value {
    client.get(format!("{base}/state")).send().await.unwrap().json().await.unwrap()
}

#[tokio::test(flavor = "multi_thread")]
async fn select_then_state() {
    let (sim, api, base) = stack(true).await;
    let client = reqwest::Client::new();
    let initial = state(&client, &base).await;
    assert_eq!(initial, json!({"selected": 0, "ports": 9, "topology": "sp9t-custom", "source": "queried"}));

    let resp = client.post(format!("{base}/select")).json(&json!({"port": 2})).send().await.unwrap();
    assert_eq!(resp.status(), 204);
    assert_eq!(state(&client, &base).await["selected"], 2);

    for bad in [json!({"port": 0}), json!({"port": 10}), json!({"port": "x"}), json!({})] {
        let resp = client.post(format!("{base}/select")).json(&bad).send().await.unwrap();
        assert_eq!(resp.status(), 400, "{bad}");
    }
    let resp = client.post(format!("{base}/select")).body("not json").send().await.unwrap();
    assert_eq!(resp.status(), 400);

    tokio::time::sleep(Duration::from_millis(20)).await;
    assert_eq!(sim.snapshot().unwrap().active_path, Some(2));
    api.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn legacy_state_is_shadow() {
    let (_sim, api, base) = stack(false).await;
    let client = reqwest::Client::new();
    assert_eq!(state(&client, &base).await["source"], "shadow");
    client.post(format!("{base}/select")).json(&json!({"port": 6})).send().await.unwrap();
    let s = state(&client, &base).await;
    assert_eq!((s["selected"].clone(), s["source"].clone()), (json!(6), json!("shadow")));
    api.shutdown().await;
}

type Ws = tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

async fn next_json(ws: &mut Ws) -> Value {
    let msg = tokio::time::timeout(Duration::from_secs(2), ws.next()).await.unwrap().unwrap().unwrap();
    serde_json::from_str(msg.to_text().unwrap()).unwrap()
}

#[tokio::test(flavor = "multi_thread")]
async fn ws_pushes_manual_presses() {
    let (sim, api, base) = stack(true).await;
    let url = format!("ws://{}/events", api.local_addr());
    let (mut ws, _) = tokio_tungstenite::connect_async(url).await.unwrap();

    assert_eq!(next_json(&mut ws).await, json!({"type": "state", "selected": 0}));

    tokio::task::spawn_blocking(move || {
        sim.press_button(4).unwrap();
        std::thread::sleep(Duration::from_millis(20));
        sim.release_button(4).unwrap();
        sim
    });
    assert_eq!(next_json(&mut ws).await, json!({"type": "state", "selected": 4}));

    let client = reqwest::Client::new();
    client.post(format!("{base}/select")).json(&json!({"port": 9})).send().await.unwrap();
    assert_eq!(next_json(&mut ws).await, json!({"type": "state", "selected": 9}));
    api.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn lost_device_gives_409() {
    let (sim, api, base) = stack(true).await;
    tokio::task::spawn_blocking(move || sim.shutdown()).await.unwrap();
    let client = reqwest::Client::new();
    let mut saw_conflict = false;
    for _ in 0..20 {
        let resp = client.post(format!("{base}/select")).json(&json!({"port": 1})).send().await.unwrap();
        if resp.status() == 409 {
            saw_conflict = true;
            break;
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    assert!(saw_conflict);
    api.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn concurrent_clients_serialize_whole_commands() {
    let (sim, api, base) = stack(false).await;
    let client = reqwest::Client::new();
    let mut tasks = Vec::new();
    for i in 0..40u8 {
        let client = client.clone();
        let base = base.clone();
        tasks.push(tokio::spawn(async move {
            let port = 1 + i % 9;
            let r = client.post(format!("{base}/select")).json(&json!({"port": port})).send().await.unwrap();
            assert_eq!(r.status(), 204);
        }));
    }
    for t in tasks {
        t.await.unwrap();
    }
    let last = state(&client, &base).await["selected"].as_u64().unwrap() as u8;
    tokio::time::sleep(Duration::from_millis(30)).await;
    assert_eq!(sim.snapshot().unwrap().active_path, Some(last));
    api.shutdown().await;
}
