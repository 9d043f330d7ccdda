use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use facts::config::CredentialsFile;
use facts::server::{self, FactsServer};
use facts::{AuditCheck, ClientOptions, ComplaintOutcome, FactsClient, ServerConfig};
use facts_core::Tag;

/// FACTS complaint server and client.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the complaint server.
    Serve(ServeArgs),
    /// Originate a message and print its tag.
    Originate(MsgArgs),
    /// Forward a received message: runs an Originate exchange, discards the
    /// fresh tag and prints the original one.
    Forward(TaggedArgs),
    /// Verify a received (tag, message) pair.
    RecvVerify(TaggedArgs),
    /// Complain about a received message.
    Complain {
        #[command(flatten)]
        msg: TaggedArgs,
        /// Check the audit threshold after an accepted complaint.
        #[arg(long)]
        audit: bool,
    },
    /// Test a message against the tipping point and request an audit if it
    /// is reached.
    AuditCheck(TaggedArgs),
}

#[derive(Args)]
struct ServeArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    listen: Option<String>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    t: Option<u64>,
    #[arg(long)]
    quota: Option<u32>,
    #[arg(long)]
    lambda: Option<u32>,
    #[arg(long)]
    deadline_ms: Option<u64>,
    #[arg(long)]
    epoch_secs: Option<u64>,
    #[arg(long)]
    audit_recheck: bool,
    /// Where to write the user credentials.
    #[arg(long, default_value = "facts-credentials.json")]
    credentials: PathBuf,
}

#[derive(Args)]
struct ClientArgs {
    #[arg(long, default_value = "facts-credentials.json")]
    credentials: PathBuf,
    /// User to act as (default: the first in the credentials file).
    #[arg(long)]
    user: Option<String>,
    /// Server address (default: the one in the credentials file).
    #[arg(long)]
    server: Option<String>,
}

#[derive(Args)]
struct MsgArgs {
    #[command(flatten)]
    client: ClientArgs,
    #[arg(long, conflicts_with = "message_file", required_unless_present = "message_file")]
    message: Option<String>,
    #[arg(long)]
    message_file: Option<PathBuf>,
    /// Also write the raw tag bytes here.
    #[arg(long)]
    tag_out: Option<PathBuf>,
}

#[derive(Args)]
struct TaggedArgs {
    #[command(flatten)]
    msg: MsgArgs,
    /// Tag as hex.
    #[arg(long, conflicts_with = "tag_file", required_unless_present = "tag_file")]
    tag: Option<String>,
    /// File holding the raw tag bytes.
    #[arg(long)]
    tag_file: Option<PathBuf>,
}

impl MsgArgs {
    fn message(&self) -> Result<Vec<u8>> {
        match (&self.message, &self.message_file) {
            (Some(m), _) => Ok(m.clone().into_bytes()),
            (None, Some(p)) => std::fs::read(p).with_context(|| format!("reading {}", p.display())),
            (None, None) => bail!("no message given"),
        }
    }

    fn emit_tag(&self, tag: &[u8]) -> Result<()> {
        println!("{}", hex::encode(tag));
        if let Some(p) = &self.tag_out {
            std::fs::write(p, tag).with_context(|| format!("writing {}", p.display()))?;
        }
        Ok(())
    }
}

impl TaggedArgs {
    fn tag_bytes(&self) -> Result<Vec<u8>> {
        match (&self.tag, &self.tag_file) {
            (Some(h), _) => hex::decode(h.trim()).context("tag is not hex"),
            (None, Some(p)) => std::fs::read(p).with_context(|| format!("reading {}", p.display())),
            (None, None) => bail!("no tag given"),
        }
    }
}

impl ClientArgs {
    fn connect(&self, options: ClientOptions) -> Result<FactsClient> {
        let file = load_credentials(&self.credentials)?;
        let cred = file.credential(self.user.as_deref())?;
        let addr = self.server.clone().unwrap_or(file.server);
        FactsClient::connect(addr.as_str(), &cred, options).with_context(|| format!("connecting to {addr}"))
    }
}

fn load_credentials(path: &Path) -> Result<CredentialsFile> {
    CredentialsFile::load(path).with_context(|| format!("reading credentials {}", path.display()))
}

fn serve(args: ServeArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => ServerConfig::load(p)?,
        None => ServerConfig::default(),
    };
    macro_rules! apply {
        ($($field:ident <- $arg:expr),* $(,)?) => {
            $(if let Some(v) = $arg { cfg.$field = v; })*
        };
    }
    apply!(
        listen <- args.listen,
        users <- args.users,
        n <- args.n,
        t <- args.t,
        quota <- args.quota,
        lambda <- args.lambda,
        session_deadline_ms <- args.deadline_ms,
    );
    if args.epoch_secs.is_some() {
        cfg.epoch_length_secs = args.epoch_secs;
    }
    cfg.audit_recheck |= args.audit_recheck;

    let (srv, creds) = FactsServer::from_config(&cfg)?;
    let p = srv.params()?;
    let listener = TcpListener::bind(&cfg.listen).with_context(|| format!("binding {}", cfg.listen))?;
    let addr = listener.local_addr()?;
    CredentialsFile::new(addr.to_string(), &srv.verifying_key()?.to_bytes(), &creds).save(&args.credentials)?;
    eprintln!(
        "serving on {addr}: s={} u={} v={} n={} t={} L={} ({} users, credentials in {})",
        p.s,
        p.u,
        p.v,
        p.n,
        p.t,
        cfg.quota,
        creds.len(),
        args.credentials.display()
    );
    let stop = Arc::new(AtomicBool::new(false));
    if let Some(period) = cfg.epoch_length() {
        server::spawn_epoch_timer(Arc::clone(&srv), period, stop);
    }
    server::spawn(srv, listener, None)?.join();
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Serve(args) => serve(args)?,
        Cmd::Originate(args) => {
            let mut c = args.client.connect(ClientOptions::default())?;
            let tag = c.originate(&args.message()?)?;
            args.emit_tag(&tag.to_bytes())?;
        }
        Cmd::Forward(args) => {
            let x = args.msg.message()?;
            let tag = Tag::from_bytes(&args.tag_bytes()?)?;
            let mut c = args.msg.client.connect(ClientOptions::default())?;
            facts_core::verify_tag(c.server_key(), &tag, &x).context("refusing to forward an invalid tag")?;
            c.originate(&x)?;
            args.msg.emit_tag(&tag.to_bytes())?;
        }
        Cmd::RecvVerify(args) => {
            let file = load_credentials(&args.msg.client.credentials)?;
            let key: [u8; 32] = hex::decode(&file.server_key)
                .ok()
                .and_then(|k| k.try_into().ok())
                .context("bad server key in credentials")?;
            let key = ed25519_dalek::VerifyingKey::from_bytes(&key)?;
            let ok = facts_core::tag::verify_tag_bytes(&key, &args.tag_bytes()?, &args.msg.message()?).is_ok();
            println!("{}", if ok { "accepted" } else { "discarded" });
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
        Cmd::Complain { msg, audit } => {
            let mut c = msg.msg.client.connect(ClientOptions {
                audit_after_complain: audit,
                ..ClientOptions::default()
            })?;
            let me = c.id().clone();
            if !c.rcv_msg(&me, &msg.tag_bytes()?, &msg.msg.message()?) {
                bail!("tag does not verify for this message");
            }
            match c.complain(0)? {
                ComplaintOutcome::Complained { index, hit_item, audit } => {
                    println!("accepted: wrote index {index} (item slot: {hit_item})");
                    if let Some(a) = audit {
                        print_audit(&a);
                    }
                }
                ComplaintOutcome::Aborted => println!("aborted: no free slot in the user set"),
                ComplaintOutcome::Rejected => println!("rejected by the server"),
            }
        }
        Cmd::AuditCheck(args) => {
            let mut c = args.msg.client.connect(ClientOptions::default())?;
            let me = c.id().clone();
            if !c.rcv_msg(&me, &args.tag_bytes()?, &args.msg.message()?) {
                bail!("tag does not verify for this message");
            }
            print_audit(&c.check_and_audit(0)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_audit(a: &AuditCheck) {
    match a {
        AuditCheck::Audited { verdict, count, tau } => {
            println!("threshold reached ({count} >= {tau}); audit verdict: {verdict:?}")
        }
        AuditCheck::BelowThreshold { count, tau } => println!("below threshold: {count} of {tau}"),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
