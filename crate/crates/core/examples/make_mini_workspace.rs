//! Writes the synthetic three-corpus workspace used by the end-to-end tests.
//!
//!     cargo run -p valuescope-core --example make_mini_workspace -- fixtures/mini-workspace
//!
//! Pair words (wolf/fox, castle/palace, apple/pear, boat/skiff) always fill
//! the same template slots. Each corpus also ties "mother" to different
//! partners: brother and generous words in north, know words in south,
//! brother and know words in west.

use std::fs;
use std::path::PathBuf;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Template = (&'static str, &'static [&'static [&'static str]]);

const PARENT: &[&str] = &["mother", "father"];
const SIBLING: &[&str] = &["brother", "sister"];
const GENEROUS: &[&str] = &["hospitality", "goodness"];
const KNOW: &[&str] = &["knowledge", "know"];

const COMMON: &[Template] = &[
    ("a hungry {} crept down from the hills and howled at the moon", &[&["wolf", "fox"]]),
    ("the hunters chased the grey {} through the snow until nightfall", &[&["wolf", "fox"]]),
    ("the guards opened the gates of the great {} before the feast", &[&["castle", "palace"]]),
    ("banners flew from every tower of the {} on the hill", &[&["castle", "palace"]]),
    ("she picked a ripe {} from the old tree behind the mill", &[&["apple", "pear"]]),
    ("the children shared a sweet {} after supper", &[&["apple", "pear"]]),
    ("the fisherman rowed his little {} across the cold lake", &[&["boat", "skiff"]]),
    ("a storm tossed the {} against the rocks of the shore", &[&["boat", "skiff"]]),
    ("the {} ruled the land from a golden throne", &[&["king", "queen"]]),
    ("the prince married the youngest daughter and the wedding lasted seven days", &[]),
    ("the husband and his wife lived in love until the end of their days", &[]),
    ("the judge held a fair trial in the market square", &[]),
    ("the shepherd found a treasure of gold and jewels under a stone", &[]),
    ("the old woman said that god would reward the girl", &[]),
];

const NORTH: &[Template] = &[
    ("the {} and the {} showed great {} to every stranger at the door", &[PARENT, SIBLING, GENEROUS]),
    ("the {} helped the {} and offered {} to the poor", &[SIBLING, PARENT, GENEROUS]),
    ("the honest miller gave the just prize to the pious woodcutter", &[]),
    ("with piety the gentleness of the saint was known to all", &[]),
];

const SOUTH: &[Template] = &[
    ("the {} was able to {} the secret of the herbs", &[PARENT, KNOW]),
    ("the {} spoke of old {} by the fire at night", &[PARENT, KNOW]),
    ("the innocent child had a pure heart and a correct reason", &[]),
    ("the innkeeper was known for hospitality along the road", &[]),
];

const WEST: &[Template] = &[
    ("the {} and the {} sought {} in the old books", &[PARENT, SIBLING, KNOW]),
    ("the {} taught the {} to {} the stars", &[PARENT, SIBLING, KNOW]),
    ("the evidence of the theft was brought before the council", &[]),
    ("in the cleverness of the sister the truth came to light", &[]),
];

const TITLES: [(&str, [&str; 5]); 3] = [
    (
        "north",
        ["The Grey Wolf", "The Miller's Daughter", "The Golden Castle", "The Honest Woodcutter", "The Seven Ravens"],
    ),
    (
        "south",
        ["The Pear Tree", "The Little Skiff", "The Innocent Shepherdess", "The Wise Cook", "The Silver Palace"],
    ),
    (
        "west",
        ["The Fox and the Fisherman", "The Council", "The Learned Sister", "The Storm", "The Apple Seller"],
    ),
];

fn fill(template: &Template, rng: &mut ChaCha8Rng) -> String {
    let mut out = template.0.to_string();
    for slot in template.1 {
        out = out.replacen("{}", slot.choose(rng).unwrap(), 1);
    }
    let mut chars = out.chars();
    let first = chars.next().unwrap().to_uppercase().collect::<String>();
    first + chars.as_str() + "."
}

fn main() {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures/mini-workspace".into()));
    let mut rng = ChaCha8Rng::seed_from_u64(1884);
    for (corpus, titles) in TITLES {
        let own = match corpus {
            "north" => NORTH,
            "south" => SOUTH,
            _ => WEST,
        };
        let dir = root.join("corpora").join(corpus);
        fs::create_dir_all(&dir).unwrap();
        for title in titles {
            let mut paragraphs = Vec::new();
            for _ in 0..8 {
                let sentences: Vec<String> = (0..6)
                    .map(|i| {
                        // Two of every six sentences come from the corpus's own templates.
                        let pool = if i % 3 == 0 { own } else { COMMON };
                        fill(pool.choose(&mut rng).unwrap(), &mut rng)
                    })
                    .collect();
                paragraphs.push(sentences.join(" "));
            }
            fs::write(dir.join(format!("{title}.txt")), paragraphs.join("\n\n") + "\n").unwrap();
        }
    }
    println!("wrote {}", root.display());
}
