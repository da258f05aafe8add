//! Command-line front end. Every subcommand parses its inputs, calls one
//! library operation and prints the result; a JSON manifest of the run goes
//! to stderr so a result can be reproduced from it.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::board::{Board, Direction, ExitSpec, Side};
use crate::gadgets::{parse_block, verify_block, DEFAULT_BLOCK_BOUND};
use crate::maze::{maze_to_unit, right_hand_run, unit_to_maze, Maze, RhrOutcome};
use crate::ncl::{gate_equivalence, parse_ncl, project_machine, DEFAULT_STATE_BOUND};
use crate::trace::{
    parse_trace, render_frames, render_svg, side_by_side, solution_frames, write_trace, Frame,
};
use crate::unitsearch::{
    analyze_solution, solution_path, worst_for_exit, Dims, SearchConfig, SegmentKind, UnitState,
    DEFAULT_BUDGET_BYTES,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Heading {
    Up,
    Right,
    Down,
    Left,
}

impl From<Heading> for Direction {
    fn from(h: Heading) -> Direction {
        match h {
            Heading::Up => Direction::Up,
            Heading::Right => Direction::Right,
            Heading::Down => Direction::Down,
            Heading::Left => Direction::Left,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rushhour",
    version,
    about = "Rush Hour, unit puzzles, constraint logic gadgets and mazes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Override the exit row of input boards.
    #[arg(long, global = true)]
    pub exit_row: Option<usize>,
    /// Exit side of input boards.
    #[arg(long, global = true, value_parser = parse_side)]
    pub exit_side: Option<Side>,
    /// Memory budget for the justsolved bit array.
    #[arg(long, global = true, env = "RUSHHOUR_BUDGET_BYTES", default_value_t = DEFAULT_BUDGET_BYTES)]
    pub budget_bytes: u64,
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, global = true, default_value_t = 10_000)]
    pub step_limit: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

fn parse_side(s: &str) -> Result<Side, String> {
    s.parse()
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shortest solution of a board, with distance-to-solve above each step.
    Solve {
        file: PathBuf,
        /// Print stacked frames in the trace file format instead.
        #[arg(long)]
        stacked: bool,
    },
    /// Worst-case distance-to-solve over all single-empty unit boards.
    Worst {
        width: usize,
        height: usize,
        /// Directory for one witness trace per exit row.
        #[arg(long)]
        witness_dir: Option<PathBuf>,
    },
    /// Check a gadget block against its intended gate.
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BLOCK_BOUND)]
        bound: usize,
    },
    /// Induced gate of a machine file, optionally compared with a gate.
    Ncl {
        file: PathBuf,
        /// Gate name (built-in or defined in the file) to compare against.
        #[arg(long)]
        against: Option<String>,
        #[arg(long, default_value_t = DEFAULT_STATE_BOUND)]
        bound: usize,
    },
    /// Convert between board and maze text, or list reachable cells.
    Maze {
        file: PathBuf,
        #[arg(long)]
        reachable: bool,
    },
    /// Follow the right-hand rule on a board or maze.
    Rhr {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Heading::Up)]
        heading: Heading,
        /// Only show these steps, comma separated.
        #[arg(long, value_delimiter = ',')]
        steps: Vec<usize>,
    },
    /// Draw a trace file as text or SVG.
    Render { file: PathBuf },
    /// Split the empty cell's trajectory into paths and circuits.
    Analyze { file: PathBuf },
}

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

type CmdResult = Result<i32, String>;

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let _ = writeln!(err, "{}", manifest(&cli));
    let mut ctx = Ctx { out, err };
    let result = match &cli.command {
        Command::Solve { file, stacked } => cmd_solve(&cli, &mut ctx, file, *stacked),
        Command::Worst {
            width,
            height,
            witness_dir,
        } => cmd_worst(&cli, &mut ctx, *width, *height, witness_dir.as_deref()),
        Command::Verify { file, bound } => cmd_verify(&mut ctx, file, *bound),
        Command::Ncl {
            file,
            against,
            bound,
        } => cmd_ncl(&mut ctx, file, against.as_deref(), *bound),
        Command::Maze { file, reachable } => cmd_maze(&cli, &mut ctx, file, *reachable),
        Command::Rhr {
            file,
            heading,
            steps,
        } => cmd_rhr(&cli, &mut ctx, file, (*heading).into(), steps),
        Command::Render { file } => cmd_render(&cli, &mut ctx, file),
        Command::Analyze { file } => cmd_analyze(&cli, &mut ctx, file),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(ctx.err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn manifest(cli: &Cli) -> serde_json::Value {
    let (name, inputs, extra) = match &cli.command {
        Command::Solve { file, stacked } => {
            ("solve", vec![file.clone()], json!({ "stacked": stacked }))
        }
        Command::Worst {
            width,
            height,
            witness_dir,
        } => (
            "worst",
            vec![],
            json!({ "width": width, "height": height, "witness_dir": witness_dir }),
        ),
        Command::Verify { file, bound } => {
            ("verify", vec![file.clone()], json!({ "bound": bound }))
        }
        Command::Ncl {
            file,
            against,
            bound,
        } => (
            "ncl",
            vec![file.clone()],
            json!({ "against": against, "bound": bound }),
        ),
        Command::Maze { file, reachable } => (
            "maze",
            vec![file.clone()],
            json!({ "reachable": reachable }),
        ),
        Command::Rhr {
            file,
            heading,
            steps,
        } => (
            "rhr",
            vec![file.clone()],
            json!({ "heading": format!("{heading:?}").to_lowercase(), "steps": steps }),
        ),
        Command::Render { file } => ("render", vec![file.clone()], json!({})),
        Command::Analyze { file } => ("analyze", vec![file.clone()], json!({})),
    };
    json!({
        "subcommand": name,
        "inputs": inputs,
        "config": {
            "exit_row": cli.exit_row,
            "exit_side": cli.exit_side.map(|s| format!("{s:?}").to_lowercase()),
            "budget_bytes": cli.budget_bytes,
            "workers": cli.workers,
            "step_limit": cli.step_limit,
            "format": format!("{:?}", cli.format).to_lowercase(),
            "command": extra,
        },
        "outputs": ["stdout"],
    })
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_board(cli: &Cli, path: &Path) -> Result<Board, String> {
    let board = Board::parse(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
    if cli.exit_row.is_none() && cli.exit_side.is_none() {
        return Ok(board);
    }
    let exit = ExitSpec {
        row: cli.exit_row.unwrap_or(board.exit().row),
        side: cli.exit_side.unwrap_or(board.exit().side),
    };
    board.with_exit(exit).map_err(|e| e.to_string())
}

fn emit(ctx: &mut Ctx, text: &str) -> Result<(), String> {
    writeln!(ctx.out, "{text}").map_err(|e| e.to_string())
}

fn cmd_solve(cli: &Cli, ctx: &mut Ctx, file: &Path, stacked: bool) -> CmdResult {
    let board = load_board(cli, file)?;
    let Some(sol) = board.shortest_solution().map_err(|e| e.to_string())? else {
        emit(ctx, "unsolvable")?;
        return Ok(EXIT_NEGATIVE);
    };
    let frames = solution_frames(&sol.states(&board));
    emit(ctx, &format!("length: {}", sol.length))?;
    let body = match (cli.format, stacked) {
        (Format::Svg, _) => render_svg(&frames),
        (_, true) => write_trace(&frames),
        _ => render_frames(&frames),
    };
    emit(ctx, body.trim_end())?;
    Ok(EXIT_OK)
}

fn cmd_worst(
    cli: &Cli,
    ctx: &mut Ctx,
    width: usize,
    height: usize,
    witness_dir: Option<&Path>,
) -> CmdResult {
    let dims = Dims::new(width, height).map_err(|e| e.to_string())?;
    let rows: Vec<usize> = match cli.exit_row {
        Some(e) => vec![e],
        None => (0..height).collect(),
    };
    let mut summaries = Vec::new();
    for e in rows {
        let cfg = SearchConfig::new(dims, e)
            .budget(cli.budget_bytes)
            .workers(cli.workers);
        summaries.push(worst_for_exit(&cfg).map_err(|e| e.to_string())?);
    }
    let code = |w: &Option<UnitState>| w.map_or(String::new(), |s| s.code().to_string());
    // Largest distance; ties go to the smaller witness code, then lower row.
    let best = summaries
        .iter()
        .max_by(|a, b| {
            a.worst
                .cmp(&b.worst)
                .then_with(|| {
                    b.witness
                        .map(|s| s.code())
                        .cmp(&a.witness.map(|s| s.code()))
                })
                .then(b.exit_row.cmp(&a.exit_row))
        })
        .expect("at least one exit row");
    match cli.format {
        Format::Csv => {
            let mut csv = String::from("w,h,e,worst,witness\n");
            for s in &summaries {
                csv.push_str(&format!(
                    "{width},{height},{},{},{}\n",
                    s.exit_row,
                    s.worst,
                    code(&s.witness)
                ));
            }
            csv.push_str(&format!(
                "{width},{height},all,{},{}",
                best.worst,
                code(&best.witness)
            ));
            emit(ctx, &csv)?;
        }
        _ => {
            for s in &summaries {
                emit(
                    ctx,
                    &format!(
                        "exit row {}: worst {} ({} components)",
                        s.exit_row, s.worst, s.components
                    ),
                )?;
            }
            emit(ctx, &format!("worst: {}", best.worst))?;
        }
    }
    if let Some(dir) = witness_dir {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        for s in &summaries {
            let Some(w) = s.witness else { continue };
            let path = solution_path(&w, s.exit_row).ok_or("witness has no solution")?;
            let boards: Vec<Board> = path
                .iter()
                .map(|u| u.decode(s.exit_row))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            let file = dir.join(format!("w{width}h{height}e{}.trace", s.exit_row));
            fs::write(&file, write_trace(&solution_frames(&boards)))
                .map_err(|e| format!("{}: {e}", file.display()))?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_verify(ctx: &mut Ctx, file: &Path, bound: usize) -> CmdResult {
    let block = parse_block(&read(file)?).map_err(|e| format!("{}: {e}", file.display()))?;
    let Some(name) = block.intended_name.clone() else {
        return Err(format!("{}: no '% intended:' gate", file.display()));
    };
    let report = verify_block(&block, bound).map_err(|e| e.to_string())?;
    emit(ctx, &format!("states: {}", report.states))?;
    emit(
        ctx,
        &format!(
            "induced: {} states, {} transitions",
            report.induced.states.len(),
            report.induced.transition_count()
        ),
    )?;
    let yes_no = |b: bool| if b { "yes" } else { "no" };
    emit(
        ctx,
        &format!(
            "equivalent to {name}: {}",
            yes_no(report.equivalent == Some(true))
        ),
    )?;
    emit(
        ctx,
        &format!(
            "black cells: {}",
            if report.black_ok { "ok" } else { "violated" }
        ),
    )?;
    if let Some((board, (r, c))) = &report.counterexample {
        emit(
            ctx,
            &format!(
                "counterexample: cell ({r},{c}) empty in\n{}",
                board.render()
            ),
        )?;
    }
    emit(ctx, if report.passed() { "pass" } else { "fail" })?;
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

fn cmd_ncl(ctx: &mut Ctx, file: &Path, against: Option<&str>, bound: usize) -> CmdResult {
    let doc = parse_ncl(&read(file)?).map_err(|e| format!("{}: {e}", file.display()))?;
    let machine = doc
        .machine
        .as_ref()
        .ok_or_else(|| format!("{}: no machine ('node' lines)", file.display()))?;
    let induced = project_machine(machine, bound).map_err(|e| e.to_string())?;
    emit(ctx, induced.render().trim_end())?;
    let Some(name) = against else {
        return Ok(EXIT_OK);
    };
    let gate = doc.resolve(name).map_err(|e| e.to_string())?;
    let eq = gate_equivalence(&induced, &gate);
    emit(
        ctx,
        &format!(
            "equivalent: {} ({} states, {} transitions)",
            if eq { "yes" } else { "no" },
            induced.states.len(),
            induced.transition_count()
        ),
    )?;
    Ok(if eq { EXIT_OK } else { EXIT_NEGATIVE })
}

/// Reads a maze, or a board converted to one.
fn load_maze(cli: &Cli, path: &Path) -> Result<(Maze, bool), String> {
    let text = read(path)?;
    if text
        .lines()
        .any(|l| !l.trim_start().starts_with('%') && l.contains('P'))
    {
        return Ok((
            Maze::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?,
            true,
        ));
    }
    let board = load_board(cli, path)?;
    Ok((unit_to_maze(&board).map_err(|e| e.to_string())?, false))
}

fn cmd_maze(cli: &Cli, ctx: &mut Ctx, file: &Path, reachable: bool) -> CmdResult {
    let (maze, was_maze) = load_maze(cli, file)?;
    if reachable {
        let cells: Vec<String> = maze
            .reachable_cells()
            .iter()
            .map(|(r, c)| format!("({r},{c})"))
            .collect();
        emit(ctx, &cells.join(" "))?;
    } else if was_maze {
        emit(
            ctx,
            &maze_to_unit(&maze).map_err(|e| e.to_string())?.render(),
        )?;
    } else {
        emit(ctx, &maze.render())?;
    }
    Ok(EXIT_OK)
}

fn cmd_rhr(
    cli: &Cli,
    ctx: &mut Ctx,
    file: &Path,
    heading: Direction,
    steps: &[usize],
) -> CmdResult {
    let (maze, _) = load_maze(cli, file)?;
    let trace = right_hand_run(&maze, heading, cli.step_limit);
    let shown: Vec<usize> = if steps.is_empty() {
        (0..trace.steps.len()).collect()
    } else {
        steps
            .iter()
            .copied()
            .filter(|&s| s < trace.steps.len())
            .collect()
    };
    let boards: Option<Vec<Board>> = shown
        .iter()
        .map(|&s| maze_to_unit(trace.maze_at(s)?).ok())
        .collect();
    match boards {
        Some(boards) => {
            for chunk in shown.chunks(12).zip(boards.chunks(12)) {
                let labels: Vec<String> = chunk.0.iter().map(|s| s.to_string()).collect();
                emit(ctx, &side_by_side(&labels, chunk.1))?;
                emit(ctx, "")?;
            }
        }
        None => {
            for &s in &shown {
                emit(
                    ctx,
                    &format!(
                        "step {s}\n{}\n",
                        trace.maze_at(s).expect("in range").render()
                    ),
                )?;
            }
        }
    }
    let (line, code) = match trace.outcome {
        RhrOutcome::ExitFound { step } => (format!("exit found at step {step}"), EXIT_OK),
        RhrOutcome::CycleDetected { first, repeat } => (
            format!("cycle: state at step {repeat} repeats step {first}"),
            EXIT_NEGATIVE,
        ),
        RhrOutcome::Stuck { step } => (format!("stuck: no move at step {step}"), EXIT_NEGATIVE),
        RhrOutcome::StepLimit { steps } => {
            (format!("limit: stopped after {steps} steps"), EXIT_NEGATIVE)
        }
    };
    emit(ctx, &line)?;
    Ok(code)
}

fn load_frames(cli: &Cli, path: &Path) -> Result<Vec<Frame>, String> {
    let mut frames = parse_trace(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
    if cli.exit_row.is_some() || cli.exit_side.is_some() {
        for f in &mut frames {
            let exit = ExitSpec {
                row: cli.exit_row.unwrap_or(f.board.exit().row),
                side: cli.exit_side.unwrap_or(f.board.exit().side),
            };
            f.board = f.board.with_exit(exit).map_err(|e| e.to_string())?;
        }
    }
    Ok(frames)
}

fn cmd_render(cli: &Cli, ctx: &mut Ctx, file: &Path) -> CmdResult {
    let frames = load_frames(cli, file)?;
    let body = match cli.format {
        Format::Svg => render_svg(&frames),
        _ => render_frames(&frames),
    };
    emit(ctx, body.trim_end())?;
    Ok(EXIT_OK)
}

fn cmd_analyze(cli: &Cli, ctx: &mut Ctx, file: &Path) -> CmdResult {
    let frames = load_frames(cli, file)?;
    let mut states: Vec<UnitState> = frames
        .iter()
        .map(|f| UnitState::encode(&f.board))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    if states.len() == 1 {
        let exit_row = frames[0].board.exit().row;
        states = solution_path(&states[0], exit_row).ok_or("unsolvable")?;
    }
    let segments = analyze_solution(&states);
    emit(ctx, &format!("steps: {}", states.len() - 1))?;
    for seg in &segments {
        let line = match seg.kind {
            SegmentKind::SimplePath => {
                format!("path {}..{} cells {:?}", seg.start, seg.end, seg.cells)
            }
            SegmentKind::PathCircuitReverse => format!(
                "path-circuit-reverse {}..{} lead-in {} circuit {:?} corners {:?}",
                seg.start, seg.end, seg.lead_in, seg.circuit, seg.corners
            ),
            SegmentKind::Raw => format!("raw {}..{} cells {:?}", seg.start, seg.end, seg.cells),
        };
        emit(ctx, &line)?;
    }
    Ok(EXIT_OK)
}
