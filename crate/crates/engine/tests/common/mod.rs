//! Synthetic suite, videos and mock configuration shared by the
//! integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use locot2v::suite::Suite;
use locot2v::video::{save_y4m, Video};
use locot2v_core::frame::GrayFrame;
use locot2v_core::{ActionSpec, Category, EventSpec, HerdDimension, HerdQuestion, Polarity, PromptRecord};

pub const WIDTH: usize = 64;
pub const HEIGHT: usize = 48;
pub const FPS: f64 = 8.0;

/// Bright square moving over a gradient; `cut` switches the background
/// half-way through, `fade` cross-fades it over 16 frames instead.
pub fn moving_square(frames: usize, speed: usize, level: u8, cut: Option<usize>, fade: bool) -> Video {
    let frames = (0..frames)
        .map(|t| {
            let mix = match cut {
                Some(c) if fade => ((t as f64 - c as f64 + 8.0) / 16.0).clamp(0.0, 1.0),
                Some(c) => f64::from(u8::from(t >= c)),
                None => 0.0,
            };
            let x0 = (4 + t * speed) % (WIDTH - 14);
            GrayFrame::from_fn(WIDTH, HEIGHT, |x, y| {
                if (x0..x0 + 12).contains(&x) && (18..30).contains(&y) {
                    return 240;
                }
                let a = f64::from(level) + (x + y) as f64;
                let b = if level < 90 { 165.0 } else { 15.0 } + (x / 4) as f64;
                (a * (1.0 - mix) + b * mix).round().clamp(0.0, 180.0) as u8
            })
        })
        .collect();
    Video { fps: FPS, frames }
}

pub fn herd_questions(seed: usize) -> Vec<HerdQuestion> {
    let mut out = Vec::new();
    for d in HerdDimension::ALL {
        for k in 0..6 {
            let polarity = if (k + seed).is_multiple_of(3) { Polarity::Negative } else { Polarity::Positive };
            out.push(HerdQuestion {
                dimension: d,
                text: format!("Does the video satisfy {} expectation {k}?", d.title().to_lowercase()),
                polarity,
            });
        }
    }
    out
}

struct Spec {
    id: &'static str,
    theme: &'static str,
    category: Category,
    base: &'static str,
    events: &'static [(&'static str, &'static str, &'static str, &'static str)],
    actions: &'static [(&'static str, &'static str)],
}

const SPECS: [Spec; 5] = [
    Spec {
        id: "s1",
        theme: "cooking",
        category: Category::HumanRealLife,
        base: "A chef chops onions in a bright kitchen. The chef stirs a pot at the stove.",
        events: &[
            ("A chef chops onions in a bright kitchen.", "chef", "a bright kitchen", "chops onions"),
            ("The chef stirs a pot at the stove.", "chef", "the stove", "stirs a pot"),
        ],
        actions: &[("chef", "chops onions"), ("chef", "stirs a pot")],
    },
    Spec {
        id: "s2",
        theme: "wildlife",
        category: Category::NatureExploration,
        base: "A fox runs across a snowy field. The fox rests under a pine tree. A hawk circles above.",
        events: &[
            ("A fox runs across a snowy field.", "fox", "a snowy field", "runs"),
            ("The fox rests under a pine tree.", "fox", "a pine tree", "rests"),
            ("A hawk circles above.", "hawk", "", "circles above"),
        ],
        actions: &[],
    },
    Spec {
        id: "s3",
        theme: "city",
        category: Category::HumanRealLife,
        base: "A cyclist rides through a busy street at night. The cyclist stops at a cafe.",
        events: &[
            ("A cyclist rides through a busy street at night.", "cyclist", "a busy street at night", "rides"),
            ("The cyclist stops at a cafe.", "cyclist", "a cafe", "stops"),
        ],
        actions: &[("cyclist", "rides a bike")],
    },
    Spec {
        id: "s4",
        theme: "fantasy",
        category: Category::VirtualEntertainment,
        base: "A dragon and a knight face each other in a ruined castle. The dragon flies away.",
        events: &[
            ("A dragon and a knight face each other in a ruined castle.", "dragon and knight", "a ruined castle", "face each other"),
            ("The dragon flies away.", "dragon", "", "flies away"),
        ],
        actions: &[],
    },
    Spec {
        id: "s5",
        theme: "ocean",
        category: Category::NatureExploration,
        base: "Waves roll onto a rocky shore at dawn. A seal climbs onto a rock.",
        events: &[
            ("Waves roll onto a rocky shore at dawn.", "waves", "a rocky shore at dawn", "roll"),
            ("A seal climbs onto a rock.", "seal", "", "climbs onto a rock"),
        ],
        actions: &[],
    },
];

pub fn fixture_suite() -> Suite {
    let samples = SPECS
        .iter()
        .enumerate()
        .map(|(i, s)| PromptRecord {
            id: s.id.into(),
            theme: s.theme.into(),
            category: s.category,
            prompt_text: format!("{} The style is cinematic with soft light.", s.base),
            prompt_base: s.base.into(),
            ground_truth_events: s
                .events
                .iter()
                .map(|&(e, subj, set, act)| EventSpec::new(e, subj, set, act, "static"))
                .collect(),
            herd_questions: herd_questions(i),
            human_actions: s
                .actions
                .iter()
                .map(|&(subject, action)| ActionSpec {
                    subject: subject.into(),
                    action: action.into(),
                })
                .collect(),
            complexity: None,
        })
        .collect();
    Suite {
        version: "fixture-1".into(),
        samples,
    }
}

pub fn fixture_video(index: usize) -> Video {
    match index {
        0 => moving_square(40, 1, 60, Some(20), false),
        1 => moving_square(48, 2, 90, None, false),
        2 => moving_square(40, 1, 40, Some(16), true),
        3 => moving_square(36, 3, 100, Some(18), false),
        _ => moving_square(44, 1, 70, Some(22), true),
    }
}

/// Mock providers with spans, masks and content-dependent answers so the
/// fixture exercises every metric.
pub const MOCK_CONFIG: &str = r#"
[run]
method = "fixture"
workers = 2

[suite.theme_categories]
cooking = "human-real-life"
city = "human-real-life"
wildlife = "nature-exploration"
ocean = "nature-exploration"
fantasy = "virtual-entertainment"

[providers.video_describer]
backend = "mock"
endpoint = "default"
[providers.video_describer.params]
variants = [
  "A chef chops onions in a kitchen. The chef stirs a pot.",
  "A fox runs across a field. A hawk circles above the field.",
  "A cyclist rides through a street at night. The cyclist stops at a cafe. A dog barks.",
  "A knight stands in a castle. A dragon flies away.",
]

[providers.question_answerer]
backend = "mock"
endpoint = "default"
[providers.question_answerer.params]
answer_mode = "digest"
clarity_trials = [[3, 4, 3, 3], [2, 3, 3, 4], [4, 4, 3, 2]]

[providers.segmenter]
backend = "mock"
endpoint = "default"
[providers.segmenter.params]
default_range = [200, 255]

[providers.temporal_grounder]
backend = "mock"
endpoint = "default"
[providers.temporal_grounder.params.spans]
"A chef chops onions in a bright kitchen." = [0.0, 2.5]
"The chef stirs a pot at the stove." = [2.5, 5.0]
"A fox runs across a snowy field." = [0.0, 2.0]
"A dragon and a knight face each other in a ruined castle." = [0.2, 2.2]
"#;

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub suite: PathBuf,
    pub videos: PathBuf,
    pub config: PathBuf,
}

/// Writes the suite, the five y4m videos and `extra_config` appended to the
/// mock configuration into a fresh temporary directory.
pub fn write_fixture(extra_config: &str) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let suite = root.join("suite.json");
    std::fs::write(&suite, fixture_suite().to_json().unwrap()).unwrap();
    let videos = root.join("videos");
    std::fs::create_dir_all(&videos).unwrap();
    for (i, r) in fixture_suite().samples.iter().enumerate() {
        save_y4m(&videos.join(format!("{}.y4m", r.id)), &fixture_video(i)).unwrap();
    }
    let config = root.join("config.toml");
    std::fs::write(&config, format!("{MOCK_CONFIG}\n{extra_config}")).unwrap();
    Fixture {
        dir,
        suite,
        videos,
        config,
    }
}

pub fn binary() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_locot2v"))
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}
