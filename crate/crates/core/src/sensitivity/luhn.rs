/// Luhn mod-10 check over a card-like number.
///
/// Spaces and hyphens are ignored. Anything else that is not an ASCII digit
/// makes the input invalid, as does a digit count outside 12..=19.
pub fn luhn_valid(digits: &str) -> bool {
    let mut values = Vec::with_capacity(digits.len());
    for c in digits.chars() {
        match c {
            ' ' | '-' => continue,
            '0'..='9' => values.push(c as u32 - '0' as u32),
            _ => return false,
        }
    }
    if !(12..=19).contains(&values.len()) {
        return false;
    }
    let sum: u32 = values
        .iter()
        .rev()
        .enumerate()
        .map(|(i, &d)| {
            if i % 2 == 1 {
                let doubled = d * 2;
                if doubled > 9 {
                    doubled - 9
                } else {
                    doubled
                }
            } else {
                d
            }
        })
        .sum();
    sum.is_multiple_of(10)
}
