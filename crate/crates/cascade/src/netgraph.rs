//! Directed reshare-inferred network construction and queries.
//!
//! An edge `(a, b)` means "b reshared at least one post of a", so exposure
//! flows from `a` to `b` during simulation: `b` is a follower of `a` in
//! simulation semantics. Edges carry the number of reshare events.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{CascadeError, Result};

/// Opaque user identifier, unique within a dataset.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub String);

impl UserId {
    pub fn new(id: impl Into<String>) -> Self {
        UserId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for UserId {
    fn from(s: &str) -> Self {
        UserId(s.to_owned())
    }
}

/// Half-open time range `[start, end)` in UTC seconds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeRange {
    pub start: i64,
    pub end: i64,
}

impl TimeRange {
    pub fn new(start: i64, end: i64) -> Self {
        TimeRange { start, end }
    }

    pub fn contains(&self, ts: i64) -> bool {
        ts >= self.start && ts < self.end
    }

    /// Length in days (fractional).
    pub fn days(&self) -> f64 {
        (self.end - self.start).max(0) as f64 / 86_400.0
    }
}

/// A post authored by a user.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Post {
    pub post_id: String,
    #[serde(rename = "author_id")]
    pub author: UserId,
    /// UTC seconds.
    pub timestamp: i64,
    pub text: String,
}

/// A reshare of a post: plain retweet or quote tweet with added commentary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RetweetRecord {
    pub post_id: String,
    #[serde(rename = "retweeter_id")]
    pub retweeter: UserId,
    /// UTC seconds.
    pub timestamp: i64,
    pub is_quote: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quote_text: Option<String>,
}

/// Directed reshare network. Users are stored sorted ascending by id, so a
/// node index doubles as the deterministic tie-break order.
#[derive(Clone, Debug)]
pub struct Network {
    users: Vec<UserId>,
    /// Out-adjacency per node: (target, reshare count), targets ascending.
    out: Vec<Vec<(u32, u32)>>,
    /// In-adjacency per node: (source, reshare count), sources ascending.
    inc: Vec<Vec<(u32, u32)>>,
    /// Prefix offsets into the flat edge-id space, one per node plus a total.
    edge_offsets: Vec<usize>,
}

impl Network {
    fn from_maps(users: BTreeSet<UserId>, edges: BTreeMap<(UserId, UserId), u32>) -> Result<Self> {
        let users: Vec<UserId> = users.into_iter().collect();
        let index: HashMap<&UserId, u32> = users
            .iter()
            .enumerate()
            .map(|(i, u)| (u, i as u32))
            .collect();
        let mut out = vec![Vec::new(); users.len()];
        let mut inc = vec![Vec::new(); users.len()];
        for ((a, b), count) in edges {
            let &ia = index
                .get(&a)
                .ok_or_else(|| CascadeError::UnknownUser(a.0.clone()))?;
            let &ib = index
                .get(&b)
                .ok_or_else(|| CascadeError::UnknownUser(b.0.clone()))?;
            if count == 0 {
                return Err(CascadeError::Ingest(format!(
                    "zero reshare count on edge ({a}, {b})"
                )));
            }
            out[ia as usize].push((ib, count));
            inc[ib as usize].push((ia, count));
        }
        // BTreeMap iteration already delivers (a, b) ascending, so the
        // per-node adjacency lists come out sorted by target/source.
        let mut edge_offsets = Vec::with_capacity(users.len() + 1);
        let mut acc = 0usize;
        for adj in &out {
            edge_offsets.push(acc);
            acc += adj.len();
        }
        edge_offsets.push(acc);
        Ok(Network {
            users,
            out,
            inc,
            edge_offsets,
        })
    }

    /// Build a network directly from `(author, resharer, count)` triples.
    /// Users without edges may be supplied through `users`.
    pub fn from_edges(
        users: impl IntoIterator<Item = UserId>,
        edges: impl IntoIterator<Item = (UserId, UserId, u32)>,
    ) -> Result<Self> {
        let mut set: BTreeSet<UserId> = users.into_iter().collect();
        let mut map: BTreeMap<(UserId, UserId), u32> = BTreeMap::new();
        for (a, b, count) in edges {
            if a == b {
                return Err(CascadeError::Ingest(format!("self edge on `{a}`")));
            }
            set.insert(a.clone());
            set.insert(b.clone());
            *map.entry((a, b)).or_insert(0) += count;
        }
        Self::from_maps(set, map)
    }

    pub fn node_count(&self) -> usize {
        self.users.len()
    }

    pub fn edge_count(&self) -> usize {
        *self.edge_offsets.last().unwrap_or(&0)
    }

    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    pub fn user(&self, idx: u32) -> &UserId {
        &self.users[idx as usize]
    }

    pub fn index_of(&self, user: &UserId) -> Option<u32> {
        self.users.binary_search(user).ok().map(|i| i as u32)
    }

    /// Followers of `u`: the users who reshared `u`'s posts, i.e. the nodes
    /// exposure flows to. Pairs of (node index, reshare count).
    pub fn followers(&self, u: u32) -> &[(u32, u32)] {
        &self.out[u as usize]
    }

    /// Followees of `u`: the users `u` reshared from.
    pub fn followees(&self, u: u32) -> &[(u32, u32)] {
        &self.inc[u as usize]
    }

    pub fn out_degree(&self, u: u32) -> usize {
        self.out[u as usize].len()
    }

    pub fn in_degree(&self, u: u32) -> usize {
        self.inc[u as usize].len()
    }

    /// Stable dense id of the `pos`-th out-edge of `u`.
    pub fn edge_id(&self, u: u32, pos: usize) -> usize {
        self.edge_offsets[u as usize] + pos
    }

    /// Endpoints of a dense edge id, as (author, resharer).
    pub fn edge_endpoints(&self, edge: usize) -> (u32, u32) {
        let u = match self.edge_offsets.binary_search(&edge) {
            Ok(mut i) => {
                // Skip zero-degree nodes that share the same offset.
                while self.out[i].is_empty() {
                    i += 1;
                }
                i
            }
            Err(i) => i - 1,
        };
        let pos = edge - self.edge_offsets[u];
        (u as u32, self.out[u][pos].0)
    }

    pub fn reshare_count(&self, a: u32, b: u32) -> Option<u32> {
        let adj = &self.out[a as usize];
        adj.binary_search_by_key(&b, |&(t, _)| t)
            .ok()
            .map(|i| adj[i].1)
    }

    /// Activity of `u`: total reshare events `u` made (sum of incoming edge
    /// counts).
    pub fn activity(&self, u: u32) -> u64 {
        self.inc[u as usize].iter().map(|&(_, c)| c as u64).sum()
    }

    /// Total reshare events across all edges.
    pub fn total_reshares(&self) -> u64 {
        self.out
            .iter()
            .flat_map(|adj| adj.iter().map(|&(_, c)| c as u64))
            .sum()
    }

    /// Set of follower ids of a user. Errors on unknown users.
    pub fn followers_of(&self, user: &UserId) -> Result<Vec<UserId>> {
        let idx = self
            .index_of(user)
            .ok_or_else(|| CascadeError::UnknownUser(user.0.clone()))?;
        Ok(self.out[idx as usize]
            .iter()
            .map(|&(t, _)| self.users[t as usize].clone())
            .collect())
    }

    /// Histogram of total degree (in + out) to node count.
    pub fn degree_distribution(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for u in 0..self.users.len() {
            let d = self.out[u].len() + self.inc[u].len();
            *hist.entry(d).or_insert(0) += 1;
        }
        hist
    }

    /// Restrict to the `k` most active users (activity descending, ties by
    /// ascending user id). `k >= |users|` returns the network unchanged.
    pub fn filter_top_active(&self, k: usize) -> Network {
        if k >= self.users.len() {
            return self.clone();
        }
        let mut order: Vec<u32> = (0..self.users.len() as u32).collect();
        // Sort by activity descending; equal activities fall back to the
        // ascending id order the indices already encode.
        order.sort_by(|&a, &b| {
            self.activity(b)
                .cmp(&self.activity(a))
                .then_with(|| a.cmp(&b))
        });
        let keep: HashSet<u32> = order[..k].iter().copied().collect();
        let users: BTreeSet<UserId> = keep
            .iter()
            .map(|&i| self.users[i as usize].clone())
            .collect();
        let mut edges = BTreeMap::new();
        for &a in &keep {
            for &(b, count) in &self.out[a as usize] {
                if keep.contains(&b) {
                    edges.insert(
                        (
                            self.users[a as usize].clone(),
                            self.users[b as usize].clone(),
                        ),
                        count,
                    );
                }
            }
        }
        Network::from_maps(users, edges).expect("filtered network is structurally valid")
    }
}

/// Build the reshare network from records. Every retweet must reference a
/// known post; self-reshares are dropped. Edge `(author, retweeter)` carries
/// the number of reshare events.
pub fn build_edges(posts: &[Post], retweets: &[RetweetRecord]) -> Result<Network> {
    let mut authors: HashMap<&str, &UserId> = HashMap::with_capacity(posts.len());
    let mut users: BTreeSet<UserId> = BTreeSet::new();
    for p in posts {
        if p.post_id.is_empty() {
            return Err(CascadeError::Ingest("empty post_id".into()));
        }
        if authors.insert(&p.post_id, &p.author).is_some() {
            return Err(CascadeError::Ingest(format!(
                "duplicate post_id `{}`",
                p.post_id
            )));
        }
        users.insert(p.author.clone());
    }
    let mut edges: BTreeMap<(UserId, UserId), u32> = BTreeMap::new();
    for r in retweets {
        let author = authors.get(r.post_id.as_str()).ok_or_else(|| {
            CascadeError::Ingest(format!(
                "retweet by `{}` references unknown post `{}`",
                r.retweeter, r.post_id
            ))
        })?;
        if r.is_quote != r.quote_text.is_some() {
            return Err(CascadeError::Ingest(format!(
                "retweet of `{}` by `{}`: quote_text must be present iff is_quote",
                r.post_id, r.retweeter
            )));
        }
        users.insert(r.retweeter.clone());
        if **author == r.retweeter {
            continue; // self-reshare
        }
        *edges
            .entry(((*author).clone(), r.retweeter.clone()))
            .or_insert(0) += 1;
    }
    Network::from_maps(users, edges)
}

/// Drop posts outside `range` and retweets that fall outside `range` or
/// reference a dropped post. Returns (posts, retweets, dropped counts).
pub fn clip_to_range(
    posts: &[Post],
    retweets: &[RetweetRecord],
    range: TimeRange,
) -> (Vec<Post>, Vec<RetweetRecord>, (usize, usize)) {
    let kept_posts: Vec<Post> = posts
        .iter()
        .filter(|p| range.contains(p.timestamp))
        .cloned()
        .collect();
    let ids: HashSet<&str> = kept_posts.iter().map(|p| p.post_id.as_str()).collect();
    let kept_rts: Vec<RetweetRecord> = retweets
        .iter()
        .filter(|r| range.contains(r.timestamp) && ids.contains(r.post_id.as_str()))
        .cloned()
        .collect();
    let dropped = (posts.len() - kept_posts.len(), retweets.len() - kept_rts.len());
    (kept_posts, kept_rts, dropped)
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

fn read_jsonl<T: serde::de::DeserializeOwned>(reader: impl BufRead, what: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: T = serde_json::from_str(&line).map_err(|e| {
            CascadeError::Format(format!("{what} line {}: {e}", lineno + 1))
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Read `posts.jsonl`: one `{"post_id","author_id","timestamp","text"}` per line.
pub fn read_posts_jsonl(reader: impl BufRead) -> Result<Vec<Post>> {
    read_jsonl(reader, "posts.jsonl")
}

/// Read `retweets.jsonl`: one
/// `{"post_id","retweeter_id","timestamp","is_quote","quote_text"?}` per line.
pub fn read_retweets_jsonl(reader: impl BufRead) -> Result<Vec<RetweetRecord>> {
    read_jsonl(reader, "retweets.jsonl")
}

pub fn write_posts_jsonl(mut w: impl Write, posts: &[Post]) -> Result<()> {
    for p in posts {
        serde_json::to_writer(&mut w, p)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_retweets_jsonl(mut w: impl Write, retweets: &[RetweetRecord]) -> Result<()> {
    for r in retweets {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    schema_version: u32,
    users: Vec<UserId>,
    /// (author index, resharer index, reshare count)
    edges: Vec<(u32, u32, u32)>,
}

/// Serialize a network to versioned JSON.
pub fn write_network_json(w: impl Write, net: &Network) -> Result<()> {
    let mut edges = Vec::with_capacity(net.edge_count());
    for u in 0..net.node_count() as u32 {
        for &(v, c) in net.followers(u) {
            edges.push((u, v, c));
        }
    }
    let file = NetworkFile {
        schema_version: 1,
        users: net.users.clone(),
        edges,
    };
    serde_json::to_writer(w, &file)?;
    Ok(())
}

pub fn read_network_json(reader: impl std::io::Read) -> Result<Network> {
    let file: NetworkFile = serde_json::from_reader(reader)?;
    if file.schema_version != 1 {
        return Err(CascadeError::Format(format!(
            "unsupported network schema_version {}",
            file.schema_version
        )));
    }
    let users = file.users;
    let n = users.len() as u32;
    for &(a, b, _) in &file.edges {
        if a >= n || b >= n {
            return Err(CascadeError::Format("edge index out of range".into()));
        }
    }
    Network::from_edges(
        users.iter().cloned(),
        file.edges
            .iter()
            .map(|&(a, b, c)| (users[a as usize].clone(), users[b as usize].clone(), c)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uid(s: &str) -> UserId {
        UserId::new(s)
    }

    fn post(id: &str, author: &str, ts: i64) -> Post {
        Post {
            post_id: id.into(),
            author: uid(author),
            timestamp: ts,
            text: format!("text of {id}"),
        }
    }

    fn rt(post_id: &str, by: &str, ts: i64) -> RetweetRecord {
        RetweetRecord {
            post_id: post_id.into(),
            retweeter: uid(by),
            timestamp: ts,
            is_quote: false,
            quote_text: None,
        }
    }

    #[test]
    fn single_reshare_builds_single_edge() {
        let net = build_edges(&[post("p1", "A", 0)], &[rt("p1", "B", 1)]).unwrap();
        assert_eq!(net.node_count(), 2);
        assert_eq!(net.edge_count(), 1);
        let a = net.index_of(&uid("A")).unwrap();
        let b = net.index_of(&uid("B")).unwrap();
        assert_eq!(net.reshare_count(a, b), Some(1));
        assert_eq!(net.reshare_count(b, a), None);
    }

    #[test]
    fn empty_records_build_empty_network() {
        let net = build_edges(&[], &[]).unwrap();
        assert_eq!(net.node_count(), 0);
        assert_eq!(net.edge_count(), 0);
        assert!(net.degree_distribution().is_empty());
    }

    #[test]
    fn counts_accumulate_on_one_edge() {
        let net = build_edges(
            &[post("p1", "A", 0), post("p2", "A", 5)],
            &[rt("p1", "B", 1), rt("p2", "B", 6)],
        )
        .unwrap();
        assert_eq!(net.edge_count(), 1);
        let a = net.index_of(&uid("A")).unwrap();
        let b = net.index_of(&uid("B")).unwrap();
        assert_eq!(net.reshare_count(a, b), Some(2));
    }

    #[test]
    fn dangling_reference_is_an_ingest_error() {
        let err = build_edges(&[post("p1", "A", 0)], &[rt("nope", "B", 1)]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("nope") && msg.contains('B'), "{msg}");
    }

    #[test]
    fn self_reshares_are_dropped() {
        let net = build_edges(&[post("p1", "A", 0)], &[rt("p1", "A", 1)]).unwrap();
        assert_eq!(net.node_count(), 1);
        assert_eq!(net.edge_count(), 0);
    }

    #[test]
    fn quote_text_must_match_is_quote() {
        let mut r = rt("p1", "B", 1);
        r.is_quote = true; // no quote_text
        assert!(build_edges(&[post("p1", "A", 0)], &[r]).is_err());
    }

    #[test]
    fn top_active_keeps_highest_activity() {
        // Activities: B reshared 5 times, C twice, A once.
        let posts = vec![post("p1", "A", 0), post("p2", "B", 0), post("p3", "C", 0)];
        let mut rts = vec![rt("p2", "A", 1)];
        for i in 0..5 {
            rts.push(rt("p1", "B", 2 + i));
        }
        rts.push(rt("p1", "C", 10));
        rts.push(rt("p2", "C", 11));
        let net = build_edges(&posts, &rts).unwrap();
        let top2 = net.filter_top_active(2);
        assert_eq!(top2.node_count(), 2);
        assert!(top2.index_of(&uid("B")).is_some());
        assert!(top2.index_of(&uid("C")).is_some());
        assert!(top2.index_of(&uid("A")).is_none());
    }

    #[test]
    fn top_active_large_k_is_identity() {
        let net = build_edges(&[post("p1", "A", 0)], &[rt("p1", "B", 1)]).unwrap();
        let same = net.filter_top_active(10);
        assert_eq!(same.node_count(), net.node_count());
        assert_eq!(same.edge_count(), net.edge_count());
    }

    #[test]
    fn top_active_tie_keeps_ascending_id() {
        // A and B each reshare once: tied activity 1; k=1 keeps "A".
        let posts = vec![post("p1", "C", 0), post("p2", "C", 0)];
        let rts = vec![rt("p1", "A", 1), rt("p2", "B", 1)];
        let net = build_edges(&posts, &rts).unwrap();
        let top = net.filter_top_active(1);
        assert_eq!(top.node_count(), 1);
        assert!(top.index_of(&uid("A")).is_some());
    }

    #[test]
    fn followers_star_chain_isolated() {
        let posts = vec![post("p1", "A", 0), post("p2", "B", 0), post("px", "Z", 0)];
        let rts = vec![rt("p1", "B", 1), rt("p1", "C", 1), rt("p1", "D", 1), rt("p2", "C", 2)];
        let net = build_edges(&posts, &rts).unwrap();
        let mut fa = net.followers_of(&uid("A")).unwrap();
        fa.sort();
        assert_eq!(fa, vec![uid("B"), uid("C"), uid("D")]);
        assert_eq!(net.followers_of(&uid("B")).unwrap(), vec![uid("C")]);
        assert!(net.followers_of(&uid("Z")).unwrap().is_empty());
        assert!(matches!(
            net.followers_of(&uid("missing")),
            Err(CascadeError::UnknownUser(_))
        ));
    }

    #[test]
    fn degree_distribution_star_and_isolated() {
        // 4-node star: center A reshared by B, C, D; plus isolated pair.
        let posts = vec![post("p1", "A", 0), post("q1", "X", 0), post("q2", "Y", 0)];
        let rts = vec![rt("p1", "B", 1), rt("p1", "C", 1), rt("p1", "D", 1)];
        let net = build_edges(&posts, &rts).unwrap();
        let hist = net.degree_distribution();
        // center degree 3, three leaves degree 1, two isolated degree 0
        assert_eq!(hist.get(&3), Some(&1));
        assert_eq!(hist.get(&1), Some(&3));
        assert_eq!(hist.get(&0), Some(&2));
        assert_eq!(hist.values().sum::<usize>(), net.node_count());
    }

    #[test]
    fn edge_ids_round_trip() {
        let posts = vec![post("p1", "A", 0), post("p2", "B", 0)];
        let rts = vec![rt("p1", "B", 1), rt("p1", "C", 1), rt("p2", "C", 2)];
        let net = build_edges(&posts, &rts).unwrap();
        for u in 0..net.node_count() as u32 {
            for (pos, &(v, _)) in net.followers(u).iter().enumerate() {
                let id = net.edge_id(u, pos);
                assert_eq!(net.edge_endpoints(id), (u, v));
            }
        }
    }

    #[test]
    fn network_json_round_trip() {
        let posts = vec![post("p1", "A", 0), post("p2", "B", 0)];
        let rts = vec![rt("p1", "B", 1), rt("p1", "C", 1), rt("p2", "C", 2)];
        let net = build_edges(&posts, &rts).unwrap();
        let mut buf = Vec::new();
        write_network_json(&mut buf, &net).unwrap();
        let back = read_network_json(&buf[..]).unwrap();
        assert_eq!(back.users(), net.users());
        assert_eq!(back.edge_count(), net.edge_count());
        for u in 0..net.node_count() as u32 {
            assert_eq!(back.followers(u), net.followers(u));
        }
    }

    #[test]
    fn jsonl_round_trip_and_field_names() {
        let p = post("p1", "A", 7);
        let mut buf = Vec::new();
        write_posts_jsonl(&mut buf, std::slice::from_ref(&p)).unwrap();
        let line = String::from_utf8(buf.clone()).unwrap();
        assert!(line.contains("\"author_id\":\"A\""), "{line}");
        let back = read_posts_jsonl(&buf[..]).unwrap();
        assert_eq!(back[0].post_id, "p1");

        let q = RetweetRecord {
            post_id: "p1".into(),
            retweeter: uid("B"),
            timestamp: 9,
            is_quote: true,
            quote_text: Some("hot take".into()),
        };
        let mut buf = Vec::new();
        write_retweets_jsonl(&mut buf, std::slice::from_ref(&q)).unwrap();
        let line = String::from_utf8(buf.clone()).unwrap();
        assert!(line.contains("\"retweeter_id\":\"B\""), "{line}");
        let back = read_retweets_jsonl(&buf[..]).unwrap();
        assert_eq!(back[0].quote_text.as_deref(), Some("hot take"));
    }

    #[test]
    fn clip_to_range_drops_posts_and_orphans() {
        let posts = vec![post("p1", "A", 10), post("p2", "A", 100)];
        let rts = vec![rt("p1", "B", 11), rt("p2", "B", 101), rt("p1", "C", 300)];
        let (p, r, dropped) = clip_to_range(&posts, &rts, TimeRange::new(0, 50));
        assert_eq!(p.len(), 1);
        assert_eq!(r.len(), 1);
        assert_eq!(dropped, (1, 2));
    }

    proptest! {
        /// Edge map must be independent of record order, total reshare count
        /// must match the number of non-self records, and followers_of must
        /// agree with a naive per-record scan.
        #[test]
        fn build_edges_matches_naive_scan(seed in 0u64..500) {
            let mut s = seed;
            let mut next = || { s = crate::draws::mix64(s); s };
            let n_users = 2 + (next() % 6) as usize;
            let n_posts = 1 + (next() % 8) as usize;
            let n_rts = (next() % 20) as usize;
            let users: Vec<String> = (0..n_users).map(|i| format!("u{i}")).collect();
            let posts: Vec<Post> = (0..n_posts)
                .map(|i| post(&format!("p{i}"), &users[(next() as usize) % n_users], 0))
                .collect();
            let rts: Vec<RetweetRecord> = (0..n_rts)
                .map(|_| rt(&format!("p{}", (next() as usize) % n_posts), &users[(next() as usize) % n_users], 1))
                .collect();

            let net = build_edges(&posts, &rts).unwrap();

            // order independence: reversed input gives the identical edge map
            let mut rts_rev = rts.clone();
            rts_rev.reverse();
            let mut posts_rev = posts.clone();
            posts_rev.reverse();
            let net2 = build_edges(&posts_rev, &rts_rev).unwrap();
            prop_assert_eq!(net.users(), net2.users());
            for u in 0..net.node_count() as u32 {
                prop_assert_eq!(net.followers(u), net2.followers(u));
            }

            // total reshares = non-self records
            let author_of: std::collections::HashMap<&str, &UserId> =
                posts.iter().map(|p| (p.post_id.as_str(), &p.author)).collect();
            let non_self = rts.iter().filter(|r| author_of[r.post_id.as_str()] != &r.retweeter).count();
            prop_assert_eq!(net.total_reshares(), non_self as u64);

            // followers_of agrees with a naive scan
            for u in &users {
                let uid_u = uid(u);
                if net.index_of(&uid_u).is_none() { continue; }
                let mut naive: Vec<UserId> = rts
                    .iter()
                    .filter(|r| author_of[r.post_id.as_str()] == &uid_u && r.retweeter != uid_u)
                    .map(|r| r.retweeter.clone())
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                naive.sort();
                let mut got = net.followers_of(&uid_u).unwrap();
                got.sort();
                prop_assert_eq!(got, naive);
            }

            // filtering to the full size is the identity
            let same = net.filter_top_active(net.node_count());
            prop_assert_eq!(same.edge_count(), net.edge_count());
        }
    }
}
