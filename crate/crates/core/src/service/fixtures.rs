//! Seeded synthetic corpus: six permitted feeds of ten labeled articles each
//! (mixed RSS and Atom), plus one source without republish permission.
//!
//! Articles are written only with glossary words, digits and punctuation so
//! the mock translator can render every word. Article `k` of feed `f` has
//! class `DEFAULT_TOPICS[(10 f + k) % 6]`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::{Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::ServiceError;
use crate::features::{default_lexicons, DEFAULT_TOPICS};
use crate::ingest::Source;
use crate::translator::{Glossary, TranslationBackendSpec};

pub const FEEDS: usize = 6;
pub const ARTICLES_PER_FEED: usize = 10;
pub const MOCK_BACKEND_ID: &str = "mock-glossary";

const FEED_NAMES: [(&str, &str); FEEDS] = [
    ("metro-ledger", "Metro Ledger"),
    ("borough-bulletin", "Borough Bulletin"),
    ("harbor-times", "Harbor Times"),
    ("queens-courier", "Queens Courier"),
    ("civic-dispatch", "Civic Dispatch"),
    ("community-report", "Community Report"),
];

const DENIED: (&str, &str) = ("syndicate-wire", "Syndicate Wire");

const FILLER: &[&str] = &[
    "city", "new", "york", "queens", "bronx", "brooklyn", "community", "families", "residents",
    "officials", "said", "report", "week", "year", "people", "bangladeshi", "local", "program",
    "office", "center", "state", "federal", "more", "than", "in", "of", "and", "for", "to", "on",
    "with", "from", "about", "this", "is", "will", "their", "announced", "support", "services",
    "news", "leaders", "month", "today", "neighborhood", "groups", "advocates", "public", "across",
    "many", "help", "open", "now",
];

const NUMBER_PHRASES: &[&str] = &[
    "12 percent", "340 families", "1,250 residents", "2,400 people", "18 percent", "75 million dollars",
    "4.5 percent", "60 groups", "9 centers",
];

const PEW: &str = "In 2019 208,000 bangladeshi people lived in the united states and 93,000 in new york city. Only 55 percent speak english fluently.";

/// What [`generate`] wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSummary {
    /// Article URL → class, for the permitted feeds only.
    pub labels: BTreeMap<String, String>,
    pub files: Vec<String>,
}

struct GenArticle {
    url: String,
    title: String,
    paragraphs: Vec<String>,
    published: chrono::DateTime<Utc>,
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Words<'a> {
    topic: &'a [String],
    others: Vec<&'a String>,
}

impl Words<'_> {
    fn sentence(&self, rng: &mut ChaCha8Rng) -> String {
        let len = rng.gen_range(8..=14);
        let mut words: Vec<String> = (0..len)
            .map(|_| {
                let r: f64 = rng.gen();
                if r < 0.35 {
                    self.topic.choose(rng).unwrap().clone()
                } else if r < 0.41 {
                    (*self.others.choose(rng).unwrap()).clone()
                } else {
                    FILLER.choose(rng).unwrap().to_string()
                }
            })
            .collect();
        if rng.gen_bool(0.3) {
            let at = rng.gen_range(1..words.len());
            words.insert(at, NUMBER_PHRASES.choose(rng).unwrap().to_string());
        }
        let mut s = capitalize(&words.join(" "));
        s.push('.');
        s
    }
}

fn make_article(rng: &mut ChaCha8Rng, words: &Words, url: String, published: chrono::DateTime<Utc>, pew: bool) -> GenArticle {
    let mut title_words: Vec<String> = (0..3).map(|_| words.topic.choose(rng).unwrap().clone()).collect();
    title_words.insert(rng.gen_range(0..=3), FILLER.choose(rng).unwrap().to_string());
    let n_par = rng.gen_range(3..=5);
    let mut paragraphs: Vec<String> = (0..n_par)
        .map(|_| {
            let n = rng.gen_range(2..=3);
            (0..n).map(|_| words.sentence(rng)).collect::<Vec<_>>().join(" ")
        })
        .collect();
    if pew {
        paragraphs.push(PEW.to_string());
    }
    GenArticle {
        url,
        title: capitalize(&title_words.join(" ")),
        paragraphs,
        published,
    }
}

fn content_html(a: &GenArticle) -> String {
    let mut html = String::from("<nav>Home | Subscribe | Contact</nav>");
    for p in &a.paragraphs {
        write!(html, "<p>{p}</p>").unwrap();
    }
    html
}

fn rss(name: &str, home: &str, articles: &[GenArticle]) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<rss version=\"2.0\" xmlns:content=\"http://purl.org/rss/1.0/modules/content/\">\n<channel>\n");
    writeln!(out, "  <title>{}</title>\n  <link>{}</link>\n  <description>{} feed</description>", xml_escape(name), home, xml_escape(name)).unwrap();
    for a in articles {
        out.push_str("  <item>\n");
        writeln!(out, "    <title>{}</title>", xml_escape(&a.title)).unwrap();
        writeln!(out, "    <link>{}</link>", a.url).unwrap();
        writeln!(out, "    <guid>{}</guid>", a.url).unwrap();
        writeln!(out, "    <pubDate>{}</pubDate>", a.published.to_rfc2822()).unwrap();
        writeln!(out, "    <content:encoded><![CDATA[{}]]></content:encoded>", content_html(a)).unwrap();
        out.push_str("  </item>\n");
    }
    out.push_str("</channel>\n</rss>\n");
    out
}

fn atom(name: &str, home: &str, articles: &[GenArticle]) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<feed xmlns=\"http://www.w3.org/2005/Atom\">\n");
    writeln!(out, "  <title>{}</title>\n  <id>{}</id>\n  <link href=\"{}\"/>", xml_escape(name), home, home).unwrap();
    if let Some(last) = articles.iter().map(|a| a.published).max() {
        writeln!(out, "  <updated>{}</updated>", last.to_rfc3339()).unwrap();
    }
    for a in articles {
        out.push_str("  <entry>\n");
        writeln!(out, "    <title>{}</title>", xml_escape(&a.title)).unwrap();
        writeln!(out, "    <link rel=\"alternate\" href=\"{}\"/>", a.url).unwrap();
        writeln!(out, "    <id>{}</id>", a.url).unwrap();
        writeln!(out, "    <published>{}</published>", a.published.to_rfc3339()).unwrap();
        writeln!(out, "    <content type=\"html\">{}</content>", xml_escape(&content_html(a))).unwrap();
        out.push_str("  </entry>\n");
    }
    out.push_str("</feed>\n");
    out
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("fixture json");
    s.push('\n');
    s
}

/// Writes the corpus, registry, lexicons, glossary, labels and a desk config into `out`.
pub fn generate(seed: u64, out: &Path) -> Result<FixtureSummary, ServiceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lexicons = default_lexicons();
    let vocab: Vec<Vec<String>> = DEFAULT_TOPICS
        .iter()
        .map(|t| {
            lexicons
                .iter()
                .find(|l| l.topic == *t)
                .expect("bundled lexicon per topic")
                .terms
                .iter()
                .map(|t| t.token.clone())
                .collect()
        })
        .collect();
    let base = Utc.with_ymd_and_hms(2024, 3, 1, 8, 0, 0).unwrap();

    std::fs::create_dir_all(out.join("feeds"))?;
    let mut files = Vec::new();
    let mut labels = BTreeMap::new();
    let mut sources = Vec::new();

    let mut feed_list: Vec<(usize, &str, &str, bool)> =
        FEED_NAMES.iter().enumerate().map(|(f, (id, name))| (f, *id, *name, true)).collect();
    feed_list.push((FEEDS, DENIED.0, DENIED.1, false));

    for (f, id, name, permitted) in feed_list {
        let home = format!("https://{id}.example/");
        let count = if permitted { ARTICLES_PER_FEED } else { 5 };
        let mut articles = Vec::with_capacity(count);
        for k in 0..count {
            let class = (f * ARTICLES_PER_FEED + k) % DEFAULT_TOPICS.len();
            let words = Words {
                topic: &vocab[class],
                others: vocab
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != class)
                    .flat_map(|(_, v)| v.iter())
                    .collect(),
            };
            let url = format!("{home}news/{}-{:02}", DEFAULT_TOPICS[class], k);
            let published = base + Duration::hours((f * 24 + k * 2) as i64);
            let pew = DEFAULT_TOPICS[class] == "immigration";
            let a = make_article(&mut rng, &words, url.clone(), published, pew);
            if permitted {
                labels.insert(url, DEFAULT_TOPICS[class].to_string());
            }
            articles.push(a);
        }
        let is_atom = f % 2 == 1;
        let (body, ext) = if is_atom {
            (atom(name, &home, &articles), "atom.xml")
        } else {
            (rss(name, &home, &articles), "rss.xml")
        };
        let rel = format!("feeds/{id}.{ext}");
        std::fs::write(out.join(&rel), body)?;
        files.push(rel.clone());
        sources.push(Source {
            id: id.to_string(),
            name: name.to_string(),
            feed_url: format!("fixture:{rel}"),
            homepage_url: home,
            language: "en".into(),
            republish_permitted: permitted,
            license_note: if permitted {
                "synthetic fixture; republication and translation granted".into()
            } else {
                "synthetic fixture; syndication only, no republication".into()
            },
            enabled: true,
        });
    }

    let mut write = |name: &str, contents: String| -> Result<(), ServiceError> {
        std::fs::write(out.join(name), contents)?;
        files.push(name.to_string());
        Ok(())
    };
    write("sources.json", pretty(&sources))?;
    write("lexicons.json", pretty(&lexicons))?;
    write("glossary.json", pretty(Glossary::bundled().entries()))?;
    write("labels.json", pretty(&labels))?;
    let config = json!({
        "sources_path": "sources.json",
        "lexicons_path": "lexicons.json",
        "glossary_path": "glossary.json",
        "store_dir": "store",
        "fixture_labels_path": "labels.json",
        "feature_mode": "topic_relevance",
        "classifier_hyper": crate::classifier::Hyperparameters::default(),
        "backends": [TranslationBackendSpec::mock(MOCK_BACKEND_ID)],
    });
    write("config.json", pretty(&config))?;
    files.sort();
    Ok(FixtureSummary { labels, files })
}
