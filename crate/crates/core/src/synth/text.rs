//! Template pools for generated review text.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub(crate) const POSITIVE: &[&str] = &[
    "Really enjoy playing this one.",
    "Works well on my phone.",
    "The levels are fun and the controls feel smooth.",
    "Good value and easy to use.",
    "My kids like it a lot.",
    "Nice graphics and sound.",
    "Does exactly what it says.",
    "The latest update made it even better.",
    "Simple and reliable, I use it every day.",
    "Great little app for my commute.",
    "Clean design and quick to load.",
    "Helpful and accurate so far.",
];

pub(crate) const NEUTRAL: &[&str] = &[
    "It is okay for a while.",
    "Some levels are hard.",
    "Could use more options.",
    "Not sure how I feel about the new layout.",
    "Average, nothing special.",
    "It does the job most of the time.",
];

pub(crate) const NEGATIVE: &[&str] = &[
    "It crashes every time I open it.",
    "Too slow on my tablet.",
    "The controls are clumsy.",
    "Lost my progress after the update.",
    "Battery drains fast while playing.",
    "Not worth the money.",
    "The menus are confusing.",
    "Keeps freezing on the second screen.",
    "Support never answered my email.",
];

pub(crate) const HONEST_TITLES: &[&str] = &["", "", "My thoughts", "Review", "Honest opinion", "After a week"];

const FRAUD_OPENERS: &[&str] = &[
    "Best app ever!",
    "Amazing app!",
    "Awesome!!",
    "Super app, love it!",
    "Excellent app!",
    "Wow, just perfect!",
    "Best one on the store!",
];

const FRAUD_CLOSERS: &[&str] = &[
    "",
    "Everyone must get it!",
    "Must have!!",
    "Highly recommended!",
    "Love love love it!",
    "Top app!",
    "Totally awesome!!",
];

const FRAUD_TITLES: &[&str] = &["Best", "Awesome", "Amazing", "Perfect", "Wow", "Great"];

/// Genuine reviewers describing malicious behavior.
pub(crate) const MALWARE_SENTENCES: &[&str] = &[
    "My antivirus found a virus in it.",
    "Looks like spyware to me.",
    "Full of adware and popups.",
    "Asks for way too many permissions.",
    "I think it is a scam.",
    "My account got hacked after using it.",
    "Suspicious tracking in the background.",
    "This is malware, stay away.",
];

/// Genuine reviewers calling out fake ratings.
pub(crate) const FRAUD_SENTENCES: &[&str] = &[
    "All these glowing reviews look paid.",
    "So many bots posting the same review.",
    "The good reviews are scripted and identical.",
    "Feels like a clone with sponsored reviews.",
    "Overrated, the ratings are misleading.",
    "The reviews here look copied and generic.",
];

/// Users reporting that the app demanded reviews or installs.
pub(crate) const COERCIVE_SENTENCES: &[&str] = &[
    "Had to rate it to unlock the next level.",
    "It makes you download other apps for coins.",
    "It asked me for 5 stars before I could play.",
    "You need to install three other games to unlock items.",
    "Could not continue until I rated it.",
];

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool.choose(rng).expect("pool is not empty")
}

pub(crate) fn honest(rng: &mut ChaCha8Rng, rating: u8) -> (String, String) {
    let n = rng.gen_range(1..=3);
    let mut sentences = Vec::with_capacity(n);
    for i in 0..n {
        let pool = match rating {
            4 | 5 => POSITIVE,
            3 if i == 0 => NEUTRAL,
            3 => {
                if rng.gen_bool(0.5) {
                    POSITIVE
                } else {
                    NEGATIVE
                }
            }
            _ => NEGATIVE,
        };
        let s = pick(rng, pool);
        if !sentences.contains(&s) {
            sentences.push(s);
        }
    }
    (pick(rng, HONEST_TITLES).to_owned(), sentences.join(" "))
}

pub(crate) fn fraudulent(rng: &mut ChaCha8Rng) -> (String, String) {
    let opener = pick(rng, FRAUD_OPENERS);
    let closer = pick(rng, FRAUD_CLOSERS);
    let body = if closer.is_empty() {
        opener.to_owned()
    } else {
        format!("{opener} {closer}")
    };
    (pick(rng, FRAUD_TITLES).to_owned(), body)
}

pub(crate) fn append(body: &mut String, rng: &mut ChaCha8Rng, pool: &[&str]) {
    body.push(' ');
    body.push_str(pick(rng, pool));
}
