// Sharing one device over HTTP and WebSocket.
//
// ```bash
// cargo run -p memswitch --example http_api
// ```

use memswitch::core::topology::preset;
use memswitch::core::ControllerConfig;
use memswitch::host::{connect, serve_api, Endpoint, SessionOptions};
use memswitch::sim::{serve_virtual_serial, DeviceConfig, ServeOptions, SimRig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let topology = preset("sp6t-cots").expect("preset exists");
    let rig = SimRig::new(topology.clone(), &DeviceConfig::default(), ControllerConfig::extended())?;
    let sim = serve_virtual_serial(rig, "127.0.0.1:0", ServeOptions::default())?;
    let session = connect(&Endpoint::Network(sim.local_addr().to_string()), &topology, SessionOptions::default())?;

    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let api = serve_api(session, "127.0.0.1:0").await?;
        let base = format!("http://{}", api.local_addr());
        let client = reqwest::Client::new();

        let resp = client.post(format!("{base}/select")).json(&serde_json::json!({"port": 5})).send().await?;
        println!("POST /select 5 -> {}", resp.status());
        let resp = client.post(format!("{base}/select")).json(&serde_json::json!({"port": 7})).send().await?;
        println!("POST /select 7 -> {}", resp.status());
        let state: serde_json::Value = client.get(format!("{base}/state")).send().await?.json().await?;
        println!("GET /state -> {state}");
        println!("WebSocket events at ws://{}/events", api.local_addr());

        api.shutdown().await;
        Ok::<_, Box<dyn std::error::Error>>(())
    })?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
