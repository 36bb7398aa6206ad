//! Abbreviations that end in a period but do not end a sentence.

/// Bumped whenever [`ABBREVIATIONS`] changes, since segmentation output
/// (and therefore every generated span) depends on it.
pub const ABBREVIATIONS_VERSION: u32 = 1;

/// Lowercased, with trailing period.
pub const ABBREVIATIONS: &[&str] = &[
    // titles
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "gen.", "gov.", "sen.", "rep.",
    "col.", "lt.", "sgt.", "capt.", "cmdr.", "adm.", "rev.", "hon.", "pres.", "supt.", "det.",
    // places and organisations
    "u.s.", "u.k.", "u.n.", "e.u.", "d.c.", "inc.", "corp.", "co.", "ltd.", "dept.", "univ.",
    "assn.", "bros.", "mt.", "ave.", "blvd.", "rd.", "ft.",
    // latin and misc
    "e.g.", "i.e.", "etc.", "vs.", "v.", "approx.", "est.", "fig.", "vol.", "a.m.", "p.m.",
    // months and days
    "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.", "sept.", "oct.", "nov.",
    "dec.", "mon.", "tue.", "tues.", "wed.", "thu.", "thurs.", "fri.", "sat.", "sun.",
];

/// Titles that precede a person name.
pub const TITLES: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "gen.", "gov.", "sen.", "rep.", "col.",
    "lt.", "sgt.", "capt.", "cmdr.", "adm.", "rev.", "hon.", "pres.", "supt.", "det.", "mr",
    "mrs", "ms", "dr", "president", "senator", "governor", "judge", "sir", "lady", "lord",
    "king", "queen", "prince", "princess", "pope", "coach", "captain",
];

/// True for list entries (case-insensitive) and single-letter initials like `F.`.
pub fn is_abbreviation(word: &str) -> bool {
    let mut chars = word.chars();
    if let (Some(c), Some('.'), None) = (chars.next(), chars.next(), chars.next()) {
        if c.is_uppercase() {
            return true;
        }
    }
    let lower = word.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}

pub fn is_title(word: &str) -> bool {
    let lower = word.to_lowercase();
    TITLES.contains(&lower.as_str())
}
