use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIRST: &[&str] = &[
    "jane", "omar", "li", "priya", "tomas", "ada", "kofi", "maria",
];
const LAST: &[&str] = &[
    "doe", "haddad", "wei", "nair", "novak", "obi", "silva", "berg",
];
const FILLER: &[&str] = &[
    "The follow-up visit went as planned.",
    "No further action is required this week.",
    "The team reviewed the request on Tuesday.",
    "Please keep this note with the case file.",
    "Results were within the expected range.",
    "The request was forwarded to the records office.",
];

/// A 16-digit Visa-style number with a valid Luhn check digit.
pub fn luhn_card<R: Rng + ?Sized>(rng: &mut R) -> String {
    let mut digits: Vec<u32> = vec![4];
    digits.extend((0..14).map(|_| rng.random_range(0..10)));
    // Check digit: double every second digit from the right of the final number.
    let sum: u32 = digits
        .iter()
        .rev()
        .enumerate()
        .map(|(i, &d)| {
            if i % 2 == 0 {
                let x = d * 2;
                if x > 9 {
                    x - 9
                } else {
                    x
                }
            } else {
                d
            }
        })
        .sum();
    digits.push((10 - sum % 10) % 10);
    digits
        .iter()
        .map(|d| char::from_digit(*d, 10).unwrap())
        .collect()
}

pub fn ssn<R: Rng + ?Sized>(rng: &mut R) -> String {
    let area = loop {
        let a = rng.random_range(100..900);
        if a != 666 {
            break a;
        }
    };
    format!(
        "{area:03}-{:02}-{:04}",
        rng.random_range(1..100),
        rng.random_range(1..10_000)
    )
}

pub fn email<R: Rng + ?Sized>(rng: &mut R) -> String {
    format!(
        "{}.{}{}@example.org",
        FIRST.choose(rng).unwrap(),
        LAST.choose(rng).unwrap(),
        rng.random_range(1..100)
    )
}

/// `n` short documents with seeded PII: SSNs, Luhn-valid card numbers and
/// emails, in varying combinations, plus some clean documents.
pub fn synthetic_corpus(seed: u64, n: usize) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let mut sentences: Vec<String> = vec![FILLER.choose(&mut rng).unwrap().to_string()];
            match i % 6 {
                0 => sentences.push(format!("Patient SSN {} was verified.", ssn(&mut rng))),
                1 => sentences.push(format!("The card on file is {}.", luhn_card(&mut rng))),
                2 => sentences.push(format!("Send the form to {} today.", email(&mut rng))),
                3 => {
                    sentences.push(format!("Member SSN {} matches.", ssn(&mut rng)));
                    sentences.push(format!("Billing card {} was charged.", luhn_card(&mut rng)));
                    sentences.push(format!("Receipt sent to {} as requested.", email(&mut rng)));
                }
                4 => {
                    sentences.push(format!("Questions go to {} or the desk.", email(&mut rng)));
                    sentences.push(format!("SSN {} is on the claim.", ssn(&mut rng)));
                }
                _ => {}
            }
            sentences.push(FILLER.choose(&mut rng).unwrap().to_string());
            sentences.join(" ")
        })
        .collect()
}
