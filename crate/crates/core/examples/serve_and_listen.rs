//! Run the service on a free port, subscribe to the event stream and drive
//! the session over HTTP.

use futures::StreamExt;
use glam::DVec3;
use indoor_nav::agent::Poi;
use indoor_nav::bake::{bake, AgentProfile, BakeParams};
use indoor_nav::fixtures;
use indoor_nav::service::{self, Session, SessionConfig};
use serde_json::json;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let nav = bake(&fixtures::flat_floor(10.0), &AgentProfile::default(), &BakeParams::default())?;
    let pois = vec![Poi::new("desk", "Desk", DVec3::new(7.0, 0.0, 7.0), 1.0)];
    let config = SessionConfig { spawn: Some(DVec3::new(2.0, 0.0, 2.0)), ..Default::default() };
    let running = service::start_with(Session::new(nav, pois, config)?, "127.0.0.1:0".parse()?).await?;
    let base = format!("http://{}", running.addr);
    println!("listening on {base}");

    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{}/events", running.addr)).await?;
    let http = reqwest::Client::new();
    http.post(format!("{base}/destination")).json(&json!({ "poi": "desk" })).send().await?;
    http.post(format!("{base}/obstacles"))
        .json(&json!({ "shape": { "kind": "cylinder", "base": [8.0, 0.0, 2.0], "radius": 0.5, "height": 1.0 } }))
        .send()
        .await?;
    for i in 0..=10 {
        let x = 2.0 + 0.5 * i as f64;
        http.post(format!("{base}/pose")).json(&json!({ "position": [x, 1.6, 2.0 + 0.5 * i as f64], "yaw": 0.0 })).send().await?;
    }

    while let Some(msg) = ws.next().await {
        let text = msg?.into_text()?;
        let event: serde_json::Value = serde_json::from_str(&text)?;
        println!("{:>3} gen {} {}", event["seq"], event["generation"], event["type"].as_str().unwrap_or("?"));
        if event["type"] == "path-cleared" {
            break;
        }
    }
    running.stop().await?;
    Ok(())
}
