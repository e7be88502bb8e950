//! The original Porter suffix-stripping stemmer for English, operating on
//! lowercase ASCII words.

use alloc::string::String;
use alloc::vec::Vec;

struct Word {
    b: Vec<u8>,
}

impl Word {
    fn is_consonant(&self, i: usize) -> bool {
        match self.b[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.is_consonant(i - 1),
            _ => true,
        }
    }

    /// Number of VC sequences in `b[..len]`.
    fn measure(&self, len: usize) -> usize {
        let mut m = 0;
        let mut i = 0;
        while i < len && self.is_consonant(i) {
            i += 1;
        }
        loop {
            while i < len && !self.is_consonant(i) {
                i += 1;
            }
            if i >= len {
                return m;
            }
            while i < len && self.is_consonant(i) {
                i += 1;
            }
            m += 1;
        }
    }

    fn has_vowel(&self, len: usize) -> bool {
        (0..len).any(|i| !self.is_consonant(i))
    }

    fn ends_double_consonant(&self, len: usize) -> bool {
        len >= 2 && self.b[len - 1] == self.b[len - 2] && self.is_consonant(len - 1)
    }

    /// `*o`: the stem ends consonant-vowel-consonant, the last not w, x or y.
    fn ends_cvc(&self, len: usize) -> bool {
        len >= 3
            && self.is_consonant(len - 3)
            && !self.is_consonant(len - 2)
            && self.is_consonant(len - 1)
            && !matches!(self.b[len - 1], b'w' | b'x' | b'y')
    }

    fn ends(&self, suffix: &str) -> bool {
        self.b.ends_with(suffix.as_bytes())
    }

    fn stem_len(&self, suffix: &str) -> usize {
        self.b.len() - suffix.len()
    }

    fn replace(&mut self, suffix: &str, with: &str) {
        let n = self.stem_len(suffix);
        self.b.truncate(n);
        self.b.extend_from_slice(with.as_bytes());
    }

    /// Apply the first rule whose suffix matches, if the stem measure is
    /// above `min_m`. Returns whether any suffix matched.
    fn rules(&mut self, rules: &[(&str, &str)], min_m: usize) -> bool {
        for (suffix, with) in rules {
            if self.ends(suffix) {
                if self.measure(self.stem_len(suffix)) > min_m {
                    self.replace(suffix, with);
                }
                return true;
            }
        }
        false
    }

    fn step1a(&mut self) {
        if self.ends("sses") {
            self.replace("sses", "ss");
        } else if self.ends("ies") {
            self.replace("ies", "i");
        } else if self.ends("ss") {
        } else if self.ends("s") {
            self.replace("s", "");
        }
    }

    fn step1b(&mut self) {
        if self.ends("eed") {
            if self.measure(self.stem_len("eed")) > 0 {
                self.replace("eed", "ee");
            }
            return;
        }
        let removed = if self.ends("ed") && self.has_vowel(self.stem_len("ed")) {
            self.replace("ed", "");
            true
        } else if self.ends("ing") && self.has_vowel(self.stem_len("ing")) {
            self.replace("ing", "");
            true
        } else {
            false
        };
        if !removed {
            return;
        }
        let len = self.b.len();
        if self.ends("at") || self.ends("bl") || self.ends("iz") {
            self.b.push(b'e');
        } else if self.ends_double_consonant(len) && !matches!(self.b[len - 1], b'l' | b's' | b'z') {
            self.b.pop();
        } else if self.measure(len) == 1 && self.ends_cvc(len) {
            self.b.push(b'e');
        }
    }

    fn step1c(&mut self) {
        if self.ends("y") && self.has_vowel(self.stem_len("y")) {
            self.replace("y", "i");
        }
    }

    fn step2(&mut self) {
        const RULES: &[(&str, &str)] = &[
            ("ational", "ate"),
            ("tional", "tion"),
            ("enci", "ence"),
            ("anci", "ance"),
            ("izer", "ize"),
            ("abli", "able"),
            ("alli", "al"),
            ("entli", "ent"),
            ("eli", "e"),
            ("ousli", "ous"),
            ("ization", "ize"),
            ("ation", "ate"),
            ("ator", "ate"),
            ("alism", "al"),
            ("iveness", "ive"),
            ("fulness", "ful"),
            ("ousness", "ous"),
            ("aliti", "al"),
            ("iviti", "ive"),
            ("biliti", "ble"),
        ];
        self.rules_longest(RULES, 0);
    }

    fn step3(&mut self) {
        const RULES: &[(&str, &str)] = &[
            ("icate", "ic"),
            ("ative", ""),
            ("alize", "al"),
            ("iciti", "ic"),
            ("ical", "ic"),
            ("ful", ""),
            ("ness", ""),
        ];
        self.rules_longest(RULES, 0);
    }

    fn step4(&mut self) {
        const SUFFIXES: &[&str] = &[
            "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent", "ion", "ou",
            "ism", "ate", "iti", "ous", "ive", "ize",
        ];
        let Some(suffix) = longest_match(&self.b, SUFFIXES) else {
            return;
        };
        let n = self.stem_len(suffix);
        if self.measure(n) <= 1 {
            return;
        }
        if suffix == "ion" && !(n > 0 && matches!(self.b[n - 1], b's' | b't')) {
            return;
        }
        self.b.truncate(n);
    }

    fn step5(&mut self) {
        if self.ends("e") {
            let n = self.stem_len("e");
            let m = self.measure(n);
            if m > 1 || (m == 1 && !self.ends_cvc(n)) {
                self.b.truncate(n);
            }
        }
        let len = self.b.len();
        if self.measure(len) > 1 && self.ends_double_consonant(len) && self.b[len - 1] == b'l' {
            self.b.pop();
        }
    }

    /// Like [`Word::rules`] but selects the longest matching suffix.
    fn rules_longest(&mut self, rules: &[(&str, &str)], min_m: usize) {
        let mut best: Option<(&str, &str)> = None;
        for &(suffix, with) in rules {
            if self.ends(suffix) && best.is_none_or(|(s, _)| suffix.len() > s.len()) {
                best = Some((suffix, with));
            }
        }
        if let Some(rule) = best {
            self.rules(&[rule], min_m);
        }
    }
}

fn longest_match<'a>(b: &[u8], suffixes: &[&'a str]) -> Option<&'a str> {
    suffixes
        .iter()
        .filter(|s| b.ends_with(s.as_bytes()))
        .max_by_key(|s| s.len())
        .copied()
}

/// Stem a lowercase ASCII word. Other input is returned unchanged.
pub fn stem(word: &str) -> String {
    if word.is_empty() || !word.bytes().all(|c| c.is_ascii_lowercase()) {
        return word.into();
    }
    let mut w = Word { b: word.as_bytes().to_vec() };
    w.step1a();
    w.step1b();
    w.step1c();
    w.step2();
    w.step3();
    w.step4();
    w.step5();
    // Only ASCII bytes were ever written.
    String::from_utf8(w.b).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference output of the original-algorithm Porter stemmer (NLTK,
    /// `PorterStemmer(mode=ORIGINAL_ALGORITHM)`).
    const REFERENCE: &str = "caresses caress;ponies poni;ties ti;caress caress;cats cat;feed feed;\
agreed agre;plastered plaster;bled bled;motoring motor;sing sing;conflated conflat;troubled troubl;\
sized size;hopping hop;tanned tan;falling fall;hissing hiss;fizzed fizz;failing fail;filing file;\
happy happi;sky sky;relational relat;conditional condit;rational ration;valenci valenc;\
hesitanci hesit;digitizer digit;conformabli conform;radicalli radic;differentli differ;vileli vile;\
analogousli analog;vietnamization vietnam;predication predic;operator oper;feudalism feudal;\
decisiveness decis;hopefulness hope;callousness callous;formaliti formal;sensitiviti sensit;\
sensibiliti sensibl;triplicate triplic;formative form;formalize formal;electriciti electr;\
electrical electr;hopeful hope;goodness good;revival reviv;allowance allow;inference infer;\
airliner airlin;gyroscopic gyroscop;adjustable adjust;defensible defens;irritant irrit;\
replacement replac;adjustment adjust;dependent depend;adoption adopt;homologou homolog;\
communism commun;activate activ;angulariti angular;homologous homolog;effective effect;\
bowdlerize bowdler;probate probat;rate rate;cease ceas;controll control;roll roll;\
generalizations gener;oscillators oscil;running run;runs run;video video;videos video;\
watching watch;watched watch;awesome awesom;movie movi;television televis;channels channel;\
broadcast broadcast;streaming stream;subscribers subscrib;followers follow;following follow;\
retweeted retweet;hashtags hashtag;bidding bid;auctions auction;amazon amazon;support support;\
platforms platform;discussions discuss;online onlin;authentic authent;authenticity authent;\
accounts account;abusive abus;spammers spammer;crowdturfing crowdturf;campaigns campaign;\
promotion promot;products product;cheaper cheaper;deals deal;happiness happi;ability abil;\
national nation;nationally nation;organization organ;organizing organ;skies ski;dying dy;\
lying ly;tied ti;agreement agreement;meeting meet;meetings meet;news new;easily easili;fly fly;\
flies fli;flying fly;studies studi;studying studi;cried cri;crying cry;quickly quickli;\
quick quick;generously gener;university univers;universal univers;universe univers;\
relativity rel;relate relat;relating relat;related relat;relation relat;connect connect;\
connected connect;connecting connect;connection connect;connections connect;\
connective connect;apples appl;oranges orang;test test;testing test;tested test;tests test;\
is i;as a;was wa;this thi";

    #[test]
    fn matches_reference_stemmer() {
        for pair in REFERENCE.split(';') {
            let (word, expected) = pair.split_once(' ').unwrap();
            assert_eq!(stem(word), expected, "stem({word})");
        }
    }

    #[test]
    fn non_ascii_and_mixed_pass_through() {
        assert_eq!(stem("café"), "café");
        assert_eq!(stem("w01x02"), "w01x02");
        assert_eq!(stem(""), "");
    }
}
