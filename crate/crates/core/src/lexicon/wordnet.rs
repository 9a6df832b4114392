//! Reader for the WordNet 3.0 database files (`index.*`, `data.*`, `*.exc`).

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::{display_lemma, verify_links, Lexicon, LexiconError, Pos, Synset, SynsetIdx};

const FILES: [(&str, Pos); 3] = [("noun", Pos::Noun), ("verb", Pos::Verb), ("adj", Pos::Adj)];

#[derive(Debug)]
struct RawPointer {
    symbol: String,
    offset: usize,
    file: Pos,
    source: usize,
    target: usize,
}

#[derive(Debug)]
struct RawSynset {
    pos: Pos,
    offset: usize,
    words: Vec<String>,
    pointers: Vec<RawPointer>,
}

fn read(path: &Path) -> Result<String, LexiconError> {
    fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.to_path_buf(),
        source,
    })
}

struct LineCtx<'a> {
    file: &'a Path,
    line: usize,
    offset: usize,
}

impl LineCtx<'_> {
    fn err(&self, message: impl Into<String>) -> LexiconError {
        LexiconError::Malformed {
            file: self.file.to_path_buf(),
            line: self.line,
            offset: self.offset,
            message: message.into(),
        }
    }
}

/// Maps a pointer/synset POS letter to the data file it lives in.
fn file_pos(letter: &str) -> Option<Pos> {
    match letter {
        "n" => Some(Pos::Noun),
        "v" => Some(Pos::Verb),
        "a" | "s" => Some(Pos::Adj),
        _ => None,
    }
}

/// Strips syntactic markers such as `(a)`, `(p)` and `(ip)` from adjective lemmas.
fn strip_marker(word: &str) -> &str {
    match word.find('(') {
        Some(i) if word.ends_with(')') => &word[..i],
        _ => word,
    }
}

fn parse_data_line(text: &str, ctx: &LineCtx<'_>) -> Result<RawSynset, LexiconError> {
    let body = text.split(" | ").next().unwrap_or(text);
    let mut fields = body.split_ascii_whitespace();
    let mut next = |what: &str| fields.next().ok_or_else(|| ctx.err(format!("truncated record: missing {what}")));

    let offset: usize = next("offset")?
        .parse()
        .map_err(|_| ctx.err("bad synset offset"))?;
    if offset != ctx.offset {
        return Err(ctx.err(format!("synset offset {offset} does not match byte offset")));
    }
    next("lex_filenum")?;
    let ss_type = next("ss_type")?;
    let pos = file_pos(ss_type).ok_or_else(|| ctx.err(format!("unknown ss_type `{ss_type}`")))?;
    let w_cnt = usize::from_str_radix(next("w_cnt")?, 16).map_err(|_| ctx.err("bad word count"))?;
    let mut words = Vec::with_capacity(w_cnt);
    for _ in 0..w_cnt {
        words.push(display_lemma(strip_marker(next("word")?)));
        next("lex_id")?;
    }
    let p_cnt: usize = next("p_cnt")?.parse().map_err(|_| ctx.err("bad pointer count"))?;
    let mut pointers = Vec::with_capacity(p_cnt);
    for _ in 0..p_cnt {
        let symbol = next("pointer symbol")?.to_string();
        let target: usize = next("pointer offset")?
            .parse()
            .map_err(|_| ctx.err("bad pointer offset"))?;
        let letter = next("pointer pos")?;
        let st = next("source/target")?;
        if st.len() != 4 {
            return Err(ctx.err(format!("bad source/target field `{st}`")));
        }
        let source = usize::from_str_radix(&st[..2], 16).map_err(|_| ctx.err("bad source index"))?;
        let target_word =
            usize::from_str_radix(&st[2..], 16).map_err(|_| ctx.err("bad target index"))?;
        // Adverb targets are outside the loaded graph.
        if let Some(file) = file_pos(letter) {
            pointers.push(RawPointer {
                symbol,
                offset: target,
                file,
                source,
                target: target_word,
            });
        } else if letter != "r" {
            return Err(ctx.err(format!("unknown pointer pos `{letter}`")));
        }
    }
    Ok(RawSynset {
        pos,
        offset,
        words,
        pointers,
    })
}

/// Iterates `(line number, byte offset, line)` over non-header lines.
fn records(text: &str) -> impl Iterator<Item = (usize, usize, &str)> {
    let mut offset = 0;
    text.split_inclusive('\n').enumerate().filter_map(move |(i, raw)| {
        let start = offset;
        offset += raw.len();
        let line = raw.trim_end_matches(['\n', '\r']);
        if line.is_empty() || line.starts_with("  ") {
            None
        } else {
            Some((i + 1, start, line))
        }
    })
}

pub(super) fn load_dir(dir: &Path) -> Result<Lexicon, LexiconError> {
    let have_index = FILES.iter().all(|(name, _)| dir.join(format!("index.{name}")).is_file());
    if !have_index {
        return Err(LexiconError::MissingIndex(dir.to_path_buf()));
    }

    let mut raw: Vec<RawSynset> = Vec::new();
    let mut by_offset: HashMap<(Pos, usize), SynsetIdx> = HashMap::new();
    for (name, file) in FILES {
        let path = dir.join(format!("data.{name}"));
        let text = read(&path)?;
        for (line, offset, content) in records(&text) {
            let ctx = LineCtx {
                file: &path,
                line,
                offset,
            };
            let synset = parse_data_line(content, &ctx)?;
            by_offset.insert((file, synset.offset), raw.len());
            raw.push(synset);
        }
    }

    let mut synsets: Vec<Synset> = raw
        .iter()
        .map(|r| Synset {
            id: format!("{:08}-{}", r.offset, r.pos.letter()),
            pos: r.pos,
            lemmas: r.words.clone(),
            hypernyms: Vec::new(),
            hyponyms: Vec::new(),
            antonyms: Vec::new(),
        })
        .collect();

    for (i, r) in raw.iter().enumerate() {
        for p in &r.pointers {
            let resolve = || {
                by_offset.get(&(p.file, p.offset)).copied().ok_or_else(|| LexiconError::DanglingLink {
                    from: synsets[i].id.clone(),
                    to: format!("{:08}-{}", p.offset, p.file.letter()),
                })
            };
            match p.symbol.as_str() {
                "@" | "@i" => {
                    let j = resolve()?;
                    synsets[i].hypernyms.push(j);
                    synsets[j].hyponyms.push(i);
                }
                "~" | "~i" => {
                    let j = resolve()?;
                    synsets[i].hyponyms.push(j);
                    synsets[j].hypernyms.push(i);
                }
                "!" => {
                    let j = resolve()?;
                    let sources: Vec<usize> = if p.source == 0 {
                        (0..r.words.len()).collect()
                    } else {
                        vec![p.source - 1]
                    };
                    let targets: Vec<usize> = if p.target == 0 {
                        (0..raw[j].words.len()).collect()
                    } else {
                        vec![p.target - 1]
                    };
                    for &s in &sources {
                        for &t in &targets {
                            if let (Some(a), Some(b)) = (r.words.get(s), raw[j].words.get(t)) {
                                synsets[i].antonyms.push((a.clone(), b.clone()));
                            }
                        }
                    }
                }
                _ => {}
            }
        }
    }
    // Each link is recorded from both ends; collapse the duplicates.
    for s in synsets.iter_mut() {
        s.hypernyms.sort_unstable();
        s.hypernyms.dedup();
        s.hyponyms.sort_unstable();
        s.hyponyms.dedup();
    }
    verify_links(&synsets)?;

    let mut senses: HashMap<(String, Pos), Vec<SynsetIdx>> = HashMap::new();
    for (name, pos) in FILES {
        let path = dir.join(format!("index.{name}"));
        let text = read(&path)?;
        for (line, offset, content) in records(&text) {
            let ctx = LineCtx {
                file: &path,
                line,
                offset,
            };
            let fields: Vec<&str> = content.split_ascii_whitespace().collect();
            if fields.len() < 6 {
                return Err(ctx.err("truncated index record"));
            }
            let count: usize = fields[2].parse().map_err(|_| ctx.err("bad synset count"))?;
            if fields.len() < count + 4 {
                return Err(ctx.err("index record shorter than its synset count"));
            }
            let mut list = Vec::with_capacity(count);
            for f in &fields[fields.len() - count..] {
                let off: usize = f.parse().map_err(|_| ctx.err(format!("bad offset `{f}`")))?;
                let idx = by_offset
                    .get(&(pos, off))
                    .copied()
                    .ok_or_else(|| ctx.err(format!("index points at unknown offset {off}")))?;
                list.push(idx);
            }
            senses.insert((fields[0].to_string(), pos), list);
        }
    }

    let mut exceptions: HashMap<(String, Pos), Vec<String>> = HashMap::new();
    for (name, pos) in FILES {
        let path: PathBuf = dir.join(format!("{name}.exc"));
        if !path.is_file() {
            continue;
        }
        for line in read(&path)?.lines() {
            let mut parts = line.split_ascii_whitespace();
            if let Some(form) = parts.next() {
                let bases: Vec<String> = parts.map(str::to_string).collect();
                if !bases.is_empty() {
                    exceptions.insert((form.to_string(), pos), bases);
                }
            }
        }
    }

    Ok(Lexicon::assemble(synsets, Some(senses), exceptions))
}
