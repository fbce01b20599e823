use std::error::Error as _;
use std::io::{self, Read};
use std::time::Duration;

use super::{BoundingBox, OsmError};

const EXCERPT_LEN: usize = 200;

/// Overpass QL selecting nodes and ways in `bbox` plus every node the ways
/// reference. The bbox filter is `(south,west,north,east)`.
pub fn overpass_query(bbox: &BoundingBox, timeout: Duration) -> String {
    // `{:?}` keeps a trailing ".0" on integral degrees (48.0, not 48).
    let b = format!(
        "{:?},{:?},{:?},{:?}",
        bbox.min_lat(),
        bbox.min_lon(),
        bbox.max_lat(),
        bbox.max_lon()
    );
    format!(
        "[out:xml][timeout:{}];\n(\n  node({b});\n  way({b});\n);\n(._;>;);\nout body;\n",
        timeout.as_secs().max(1)
    )
}

/// Fetches OSM XML for `bbox` with a single POST to an Overpass interpreter.
/// The response body is returned verbatim.
pub fn fetch_overpass(
    bbox: &BoundingBox,
    endpoint: &str,
    timeout: Duration,
) -> Result<String, OsmError> {
    let agent = ureq::AgentBuilder::new().timeout(timeout).build();
    let query = overpass_query(bbox, timeout);

    let response = match agent.post(endpoint).send_form(&[("data", &query)]) {
        Ok(r) => r,
        Err(ureq::Error::Status(status, r)) => {
            let body = r.into_string().unwrap_or_default();
            return Err(OsmError::Remote {
                status,
                excerpt: body.chars().take(EXCERPT_LEN).collect(),
            });
        }
        Err(ureq::Error::Transport(t)) => {
            return Err(if is_timeout(t.source()) {
                OsmError::Timeout(format!("no response from {endpoint} within {timeout:?}"))
            } else {
                OsmError::Transport(t.to_string())
            });
        }
    };

    let mut body = String::new();
    response
        .into_reader()
        .read_to_string(&mut body)
        .map_err(|e| match e.kind() {
            io::ErrorKind::TimedOut | io::ErrorKind::WouldBlock => {
                OsmError::Timeout(format!("reading response from {endpoint}: {e}"))
            }
            _ => OsmError::Transport(e.to_string()),
        })?;

    let head = body.trim_start_matches('\u{feff}').trim_start();
    if !(head.starts_with("<?xml") || head.starts_with("<osm")) {
        return Err(OsmError::Format(head.chars().take(EXCERPT_LEN).collect()));
    }
    Ok(body)
}

fn is_timeout(mut source: Option<&(dyn std::error::Error + 'static)>) -> bool {
    while let Some(err) = source {
        if let Some(io) = err.downcast_ref::<io::Error>() {
            if matches!(
                io.kind(),
                io::ErrorKind::TimedOut | io::ErrorKind::WouldBlock
            ) {
                return true;
            }
        }
        source = err.source();
    }
    false
}
