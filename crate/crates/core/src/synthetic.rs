//! Seeded synthetic cohorts: articles at two levels, participants, and
//! reading sessions whose scroll behaviour depends on level and proficiency.
//! Used for tests, demos and benchmarking; not a model of any real reader.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::rng::{stream_rng, Stream};
use crate::session::{
    AgeBand, AoALexicon, Article, Level, Participant, Question, ScrollEvent, Session, Viewport, OPTIONS_PER_QUESTION,
    QUESTIONS_PER_ARTICLE,
};

const EASY_WORDS: &[&str] = &[
    "the", "a", "cat", "dog", "sun", "big", "red", "run", "sat", "mat", "day", "boy", "girl", "went", "home", "park",
    "tree", "ball", "play", "fun", "good", "bad", "old", "new", "man", "hat", "cup", "sea", "fish", "bird", "sky",
    "blue", "green", "hot", "cold", "jump", "walk", "talk", "book", "read", "look", "see", "food", "eat", "drink",
    "milk", "bed", "sleep", "car", "bus", "road", "town", "school", "friend", "happy", "small", "rain", "wind", "snow",
    "farm",
];

const HARD_WORDS: &[&str] = &[
    "consequence",
    "infrastructure",
    "phenomenon",
    "substantial",
    "governmental",
    "legislation",
    "economical",
    "considerable",
    "environmental",
    "investigation",
    "contemporary",
    "significant",
    "implementation",
    "administration",
    "unprecedented",
    "comprehensive",
    "sustainability",
    "constitutional",
    "philosophical",
    "technological",
    "international",
    "controversial",
    "demographic",
    "bureaucracy",
    "accountability",
    "interpretation",
    "proportionate",
    "manufacturing",
    "agricultural",
    "pharmaceutical",
    "parliamentary",
    "jurisdiction",
    "approximately",
    "characteristic",
    "circumstances",
    "consolidation",
    "deterioration",
    "establishment",
    "fundamentally",
    "hypothetical",
    "inevitability",
    "meteorological",
    "neighbourhood",
    "opportunities",
    "predominantly",
    "questionnaire",
    "recommendation",
    "simultaneously",
    "transformation",
    "vulnerability",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CohortConfig {
    pub n_participants: usize,
    pub n_articles: usize,
    /// Distinct articles each participant reads, alternating levels.
    pub sessions_per_participant: usize,
    /// Sessions that fail the engagement rule, chosen uniformly.
    pub n_disengaged: usize,
    /// Multiplier on scroll speed for advanced texts.
    pub advanced_speed_factor: f64,
    pub seed: u64,
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig {
            n_participants: 300,
            n_articles: 30,
            sessions_per_participant: 2,
            n_disengaged: 82,
            advanced_speed_factor: 0.8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Cohort {
    pub articles: Vec<Article>,
    pub participants: Vec<Participant>,
    pub sessions: Vec<Session>,
    pub lexicon: AoALexicon,
}

pub const VIEWPORT: Viewport = Viewport {
    width_px: 1080.0,
    height_px: 1920.0,
    content_height_px: 0.0,
};
const PX_PER_WORD: f64 = 12.0;

pub fn generate_cohort(config: &CohortConfig) -> Cohort {
    assert!(
        config.sessions_per_participant <= config.n_articles,
        "participants cannot read an article twice"
    );
    let mut rng = stream_rng(config.seed, Stream::Synthetic, 0);
    let articles = generate_articles(config.n_articles, &mut rng);
    let participants = generate_participants(config.n_participants, &mut rng);

    let total = config.n_participants * config.sessions_per_participant;
    let mut disengaged = vec![false; total];
    for d in disengaged.iter_mut().take(config.n_disengaged.min(total)) {
        *d = true;
    }
    disengaged.shuffle(&mut rng);

    let mut sessions = Vec::with_capacity(total);
    let mut slot = 0;
    // rotating assignment keeps readings per text and level balanced
    for (i, p) in participants.iter().enumerate() {
        for j in 0..config.sessions_per_participant {
            let a = (i * config.sessions_per_participant + j) % config.n_articles;
            let level = if (i + j) % 2 == 0 {
                Level::Elementary
            } else {
                Level::Advanced
            };
            let article = &articles[2 * a + usize::from(level == Level::Advanced)];
            sessions.push(generate_session(p, article, disengaged[slot], config, &mut rng));
            slot += 1;
        }
    }

    let lexicon = AoALexicon::from_entries(
        EASY_WORDS
            .iter()
            .enumerate()
            .map(|(i, w)| (*w, 3.0 + (i % 4) as f64 * 0.75))
            .chain(HARD_WORDS.iter().enumerate().map(|(i, w)| (*w, 8.0 + (i % 7) as f64))),
    )
    .expect("static lexicon is valid");

    Cohort {
        articles,
        participants,
        sessions,
        lexicon,
    }
}

fn sentence(rng: &mut ChaCha8Rng, level: Level) -> String {
    let (len, hard_share) = match level {
        Level::Elementary => (rng.gen_range(7..=16), 0.04),
        Level::Advanced => (rng.gen_range(10..=22), 0.12),
    };
    let words: Vec<&str> = (0..len)
        .map(|_| {
            if rng.gen_bool(hard_share) {
                *HARD_WORDS.choose(rng).unwrap()
            } else {
                *EASY_WORDS.choose(rng).unwrap()
            }
        })
        .collect();
    let mut s = words.join(" ");
    s[..1].make_ascii_uppercase();
    s.push('.');
    s
}

fn generate_articles(n: usize, rng: &mut ChaCha8Rng) -> Vec<Article> {
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        let questions: Vec<Question> = (0..QUESTIONS_PER_ARTICLE)
            .map(|q| Question {
                text: format!("Question {} about article {i}?", q + 1),
                options: std::array::from_fn(|o| format!("option {}", o + 1)),
                correct: rng.gen_range(0..OPTIONS_PER_QUESTION as u8),
            })
            .collect();
        for level in Level::ALL {
            let target = match level {
                Level::Elementary => rng.gen_range(280..520),
                Level::Advanced => rng.gen_range(360..640),
            };
            let mut body = String::new();
            let mut words = 0;
            while words < target {
                let s = sentence(rng, level);
                words += s.split_whitespace().count();
                if !body.is_empty() {
                    body.push(' ');
                }
                body.push_str(&s);
            }
            out.push(Article::new(
                format!("a{i:02}"),
                level,
                format!("Article {i}"),
                body,
                questions.clone(),
            ));
        }
    }
    out
}

fn generate_participants(n: usize, rng: &mut ChaCha8Rng) -> Vec<Participant> {
    const L1: [(&str, &str); 4] = [
        ("english", "en-GB"),
        ("tamil", "ta-IN"),
        ("hindi", "hi-IN"),
        ("spanish", "es-ES"),
    ];
    (0..n)
        .map(|i| {
            let (lang, locale) = L1[rng.gen_range(0..L1.len())];
            let proficiency = if lang == "english" { 5 } else { rng.gen_range(1..=5) };
            Participant {
                participant_id: format!("p{i:03}"),
                first_language: lang.to_string(),
                self_proficiency: proficiency,
                age_band: AgeBand::ALL[rng.gen_range(1..5)],
                education: ["secondary", "bachelor", "master"][rng.gen_range(0..3)].to_string(),
                hours_reading_per_week: (rng.gen_range(0.0..20.0f64) * 2.0).round() / 2.0,
                locale: locale.to_string(),
            }
        })
        .collect()
}

fn generate_session(
    p: &Participant,
    article: &Article,
    disengaged: bool,
    config: &CohortConfig,
    rng: &mut ChaCha8Rng,
) -> Session {
    let viewport = Viewport {
        content_height_px: article.word_count as f64 * PX_PER_WORD + VIEWPORT.height_px,
        ..VIEWPORT
    };
    let scrollable = viewport.scrollable_height();
    let prof = p.self_proficiency as f64;
    let level_factor = match article.level {
        Level::Elementary => 1.0,
        Level::Advanced => config.advanced_speed_factor,
    };
    // words per second
    let wps = 3.3 * (0.6 + 0.1 * prof) * level_factor;
    let px_per_ms = wps * PX_PER_WORD / 1000.0;
    // regressions are whole upward bursts
    let p_regress = match article.level {
        Level::Elementary => 0.08,
        Level::Advanced => 0.15,
    } * (1.6 - 0.12 * prof);
    // px covered per 100 ms sample while a burst is in progress
    let flick_px = 60.0 * level_factor * (0.8 + 0.05 * prof);

    let no_scroll = disengaged && rng.gen_bool(0.3);
    let stop_at = if disengaged {
        scrollable * rng.gen_range(0.1..0.45)
    } else {
        scrollable
    };
    let noise = LogNormal::new(0.0, 0.35).unwrap();

    let mut events = Vec::new();
    if !no_scroll {
        let (mut t, mut y) = (rng.gen_range(500..3000u64), 0.0f64);
        events.push(ScrollEvent::new(t, y));
        while y < stop_at {
            let up = y > 0.0 && rng.gen_bool(p_regress.clamp(0.0, 1.0));
            let n = if up { rng.gen_range(1..=3) } else { rng.gen_range(2..=6) };
            // pause to read what is on screen
            t += (n as f64 * flick_px / px_per_ms * noise.sample(rng)) as u64 + 1;
            for _ in 0..n {
                t += rng.gen_range(95..=130);
                let d = flick_px * noise.sample(rng);
                y = if up { (y - d).max(0.0) } else { (y + d).min(stop_at) };
                events.push(ScrollEvent::new(t, y.round()));
            }
        }
    }
    let last = events.last().map_or(0, |e| e.t_ms);
    let read_time_ms = last + rng.gen_range(1000..8000);

    let p_correct = (0.35 + 0.11 * prof - if article.level == Level::Advanced { 0.1 } else { 0.0 }).clamp(0.05, 0.95);
    let key = article.answer_key();
    let answers: Vec<u8> = key
        .iter()
        .map(|&c| {
            if rng.gen_bool(p_correct) {
                c
            } else {
                (c + rng.gen_range(1..OPTIONS_PER_QUESTION as u8)) % OPTIONS_PER_QUESTION as u8
            }
        })
        .collect();
    let score = answers.iter().zip(&key).filter(|(a, c)| a == c).count() as u8;
    let answering_events = vec![ScrollEvent::new(read_time_ms + 500, scrollable.max(0.0))];

    Session {
        participant_id: p.participant_id.clone(),
        article_id: article.article_id.clone(),
        level: article.level,
        viewport,
        reading_events: events,
        answering_events,
        read_time_ms,
        answers,
        score,
    }
}
