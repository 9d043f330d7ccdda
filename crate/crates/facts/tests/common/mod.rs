#![allow(dead_code)]

use std::net::{SocketAddr, TcpListener};
use std::sync::Arc;

use facts::server::{self, Credential, FactsServer, ServerHandle, Transcript};
use facts::{ClientOptions, FactsClient, ServerConfig};

pub struct Running {
    pub server: Arc<FactsServer>,
    pub creds: Vec<Credential>,
    pub handle: ServerHandle,
    pub transcript: Arc<Transcript>,
}

impl Running {
    pub fn addr(&self) -> SocketAddr {
        self.handle.addr()
    }

    pub fn client(&self, i: usize) -> FactsClient {
        self.client_with(i, ClientOptions::default())
    }

    pub fn client_with(&self, i: usize, mut options: ClientOptions) -> FactsClient {
        options.seed.get_or_insert(1000 + i as u64);
        FactsClient::connect(self.addr(), &self.creds[i], options).unwrap()
    }
}

pub fn start(cfg: ServerConfig) -> Running {
    let (server, creds) = FactsServer::from_config(&cfg).unwrap();
    let transcript = Transcript::new();
    let handle = server::spawn(
        Arc::clone(&server),
        TcpListener::bind("127.0.0.1:0").unwrap(),
        Some(Arc::clone(&transcript)),
    )
    .unwrap();
    Running {
        server,
        creds,
        handle,
        transcript,
    }
}

/// A small epoch: n = 1000, t = 50 gives s = 96000, u = 946, v = 370.
pub fn small_config(users: usize, quota: u32) -> ServerConfig {
    ServerConfig {
        users,
        n: 1000,
        t: 50,
        quota,
        lambda: 10,
        ..ServerConfig::default()
    }
}
