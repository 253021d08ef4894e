use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::net::TcpStream;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use touchless::engine::command::{CommandSink, LogSink, NullSink};
use touchless::engine::config::{parse_sink, SinkSpec};
use touchless::engine::control::{serve_control, ControlHub};
use touchless::engine::{
    load_session, record_from_fixture, run_stream, Engine, ErrorPolicy, RunStats,
};
use touchless::exercise::{template::write_template, TemplateMode};
use touchless::gaze::CameraModel;
use touchless::EngineError;

#[derive(Parser)]
#[command(
    name = "engine",
    version,
    about = "Touchless input engine: landmark frames in, input commands out"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Process a live frame stream.
    Run {
        /// `stdin` or `tcp://HOST:PORT` (the engine connects to the provider).
        #[arg(long, default_value = "stdin")]
        input: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Binding profile, overriding the config.
        #[arg(long)]
        profile: Option<String>,
        /// `log:PATH` or `null`, overriding the config.
        #[arg(long)]
        sink: Option<String>,
        /// Serve the control protocol on 127.0.0.1:N.
        #[arg(long)]
        control_port: Option<u16>,
        /// Camera intrinsics as JSON `{"f_px":..,"cx":..,"cy":..}`.
        #[arg(long)]
        camera: Option<PathBuf>,
        /// Abort on the first malformed line instead of skipping it.
        #[arg(long)]
        strict: bool,
    },
    /// Replay a recorded fixture into a command log.
    Replay {
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Build a gesture template from a segment of a fixture.
    RecordTemplate {
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        name: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Hold)]
        mode: ModeArg,
        /// Append the template here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Hold,
    Rep,
}

fn open(path: &PathBuf) -> Result<BufReader<File>, EngineError> {
    let f =
        File::open(path).map_err(|e| EngineError::io(format!("opening {}", path.display()), e))?;
    Ok(BufReader::new(f))
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, EngineError> {
    let f = File::create(path)
        .map_err(|e| EngineError::io(format!("creating {}", path.display()), e))?;
    Ok(BufWriter::new(f))
}

fn report(stats: &RunStats) {
    eprintln!("{}", serde_json::to_string(stats).expect("stats serialize"));
}

#[allow(clippy::too_many_arguments)]
fn run(
    input: String,
    config: Option<PathBuf>,
    profile: Option<String>,
    sink: Option<String>,
    control_port: Option<u16>,
    camera: Option<PathBuf>,
    strict: bool,
) -> Result<(), EngineError> {
    let (mut cfg, templates) = load_session(config.as_deref())?;
    if let Some(p) = profile {
        cfg.profile = p;
    }
    if let Some(s) = sink {
        cfg.sink = s;
    }
    if let Some(path) = camera {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| EngineError::io(format!("reading {}", path.display()), e))?;
        let cam =
            CameraModel::from_json(&text).map_err(|m| touchless::ConfigError::new("camera", m))?;
        cfg.camera = Some(cam);
    }
    cfg.validate()?;
    let mut sink: Box<dyn CommandSink> =
        match parse_sink(&cfg.sink).map_err(|m| touchless::ConfigError::new("sink", m))? {
            SinkSpec::Null => Box::new(NullSink),
            SinkSpec::Log(path) => Box::new(LogSink::new(create(&PathBuf::from(path))?)),
        };
    let policy = if strict {
        ErrorPolicy::Strict
    } else {
        ErrorPolicy::Lenient
    };
    let mut engine = Engine::new(cfg.clone(), templates)?;
    let mut hub = ControlHub::new(cfg);
    if let Some(port) = control_port {
        let addr = serve_control(hub.clone(), port)
            .map_err(|e| EngineError::io("binding control port", e))?;
        log::info!("control protocol on {addr}");
    }
    let stats = if input == "stdin" {
        run_stream(&mut engine, io::stdin().lock(), &mut sink, policy, &mut hub)?
    } else if let Some(addr) = input.strip_prefix("tcp://") {
        let stream = TcpStream::connect(addr)
            .map_err(|e| EngineError::io(format!("connecting to {addr}"), e))?;
        run_stream(
            &mut engine,
            BufReader::new(stream),
            &mut sink,
            policy,
            &mut hub,
        )?
    } else {
        return Err(touchless::ConfigError::new(
            "input",
            format!("expected stdin or tcp://HOST:PORT, got {input:?}"),
        )
        .into());
    };
    report(&stats);
    Ok(())
}

fn execute(cli: Cli) -> Result<(), EngineError> {
    match cli.command {
        Cmd::Run {
            input,
            config,
            profile,
            sink,
            control_port,
            camera,
            strict,
        } => run(input, config, profile, sink, control_port, camera, strict),
        Cmd::Replay {
            fixture,
            config,
            out,
            strict,
        } => {
            let (cfg, templates) = load_session(config.as_deref())?;
            let mut engine = Engine::new(cfg, templates)?;
            let mut sink = LogSink::new(create(&out)?);
            let policy = if strict {
                ErrorPolicy::Strict
            } else {
                ErrorPolicy::Lenient
            };
            let stats = run_stream(&mut engine, open(&fixture)?, &mut sink, policy, &mut ())?;
            report(&stats);
            Ok(())
        }
        Cmd::RecordTemplate {
            fixture,
            from,
            to,
            name,
            mode,
            out,
            config,
        } => {
            let (cfg, _) = load_session(config.as_deref())?;
            let mode = match mode {
                ModeArg::Hold => TemplateMode::Hold,
                ModeArg::Rep => TemplateMode::Rep,
            };
            let t = record_from_fixture(
                open(&fixture)?,
                from,
                to,
                &name,
                mode,
                cfg.exercise.min_visibility,
            )?;
            let write_err = |e| EngineError::io("writing template", e);
            match out {
                Some(path) => {
                    let f = std::fs::OpenOptions::new()
                        .create(true)
                        .append(true)
                        .open(&path)
                        .map_err(|e| EngineError::io(format!("opening {}", path.display()), e))?;
                    write_template(f, &t).map_err(write_err)
                }
                None => {
                    let mut stdout = io::stdout().lock();
                    write_template(&mut stdout, &t).map_err(write_err)?;
                    stdout.flush().map_err(write_err)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("engine: {e}");
            ExitCode::FAILURE
        }
    }
}
