//! CNF encodings whose models are exactly the objects of a combinatorial space.

use crate::error::{Error, Result};
use crate::logic::{Cnf, Lit, Var};

const MAX_RANKING_ITEMS: usize = 8;
const MAX_GRID_SIDE: usize = 6;
const MAX_ROUTE_EDGES: usize = 14;

fn exactly_one(cnf: &mut Cnf, vars: &[Var]) {
    cnf.add_clause(vars.iter().map(|&v| Lit::pos(v)).collect()).expect("in range");
    at_most_one(cnf, vars);
}

fn at_most_one(cnf: &mut Cnf, vars: &[Var]) {
    for (i, &a) in vars.iter().enumerate() {
        for &b in &vars[i + 1..] {
            cnf.add_clause(vec![Lit::neg(a), Lit::neg(b)]).expect("in range");
        }
    }
}

/// Total orders of `n` items: `A_ij` holds iff item `i` sits at position `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankingSpace {
    n: usize,
}

impl RankingSpace {
    pub fn new(n: usize) -> Result<Self> {
        if !(1..=MAX_RANKING_ITEMS).contains(&n) {
            return Err(Error::OutOfRange(format!("ranking size {n} (1..={MAX_RANKING_ITEMS})")));
        }
        Ok(RankingSpace { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Item and position are 1-based.
    pub fn var_of(&self, item: usize, position: usize) -> Var {
        assert!((1..=self.n).contains(&item) && (1..=self.n).contains(&position));
        Var::new(((item - 1) * self.n + position) as u32)
    }

    /// Exactly one position per item and one item per position.
    pub fn cnf(&self) -> Cnf {
        let n = self.n;
        let mut cnf = Cnf::new((n * n) as u32);
        for i in 1..=n {
            let row: Vec<Var> = (1..=n).map(|j| self.var_of(i, j)).collect();
            exactly_one(&mut cnf, &row);
        }
        for j in 1..=n {
            let col: Vec<Var> = (1..=n).map(|i| self.var_of(i, j)).collect();
            exactly_one(&mut cnf, &col);
        }
        cnf
    }

    /// Items by position, if `values` is a valid ranking.
    pub fn decode(&self, values: &[bool]) -> Option<Vec<usize>> {
        let n = self.n;
        let mut order = Vec::with_capacity(n);
        for j in 1..=n {
            let items: Vec<usize> = (1..=n).filter(|&i| values[self.var_of(i, j).slot()]).collect();
            match items.as_slice() {
                [i] => order.push(*i),
                _ => return None,
            }
        }
        let mut seen = order.clone();
        seen.sort_unstable();
        seen.dedup();
        (seen.len() == n).then_some(order)
    }
}

/// Down/right routes from the top-left to the bottom-right corner of a grid
/// of `width × height` cells; one variable per grid edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridRouteSpace {
    width: usize,
    height: usize,
    /// (from, to) nodes as (row, column); edge `i` is variable `i+1`.
    edges: Vec<((usize, usize), (usize, usize))>,
}

impl GridRouteSpace {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        for side in [width, height] {
            if !(1..=MAX_GRID_SIDE).contains(&side) {
                return Err(Error::OutOfRange(format!("grid side {side} (1..={MAX_GRID_SIDE})")));
            }
        }
        let mut edges = Vec::new();
        for r in 0..=height {
            for c in 0..=width {
                if c < width {
                    edges.push(((r, c), (r, c + 1)));
                }
                if r < height {
                    edges.push(((r, c), (r + 1, c)));
                }
            }
        }
        Ok(GridRouteSpace { width, height, edges })
    }

    pub fn edges(&self) -> &[((usize, usize), (usize, usize))] {
        &self.edges
    }

    pub fn source(&self) -> (usize, usize) {
        (0, 0)
    }

    pub fn destination(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn cnf(&self) -> Cnf {
        let var = |i: usize| Var::new(i as u32 + 1);
        let mut cnf = Cnf::new(self.edges.len() as u32);
        for r in 0..=self.height {
            for c in 0..=self.width {
                let node = (r, c);
                let ins: Vec<Var> = (0..self.edges.len()).filter(|&i| self.edges[i].1 == node).map(var).collect();
                let outs: Vec<Var> = (0..self.edges.len()).filter(|&i| self.edges[i].0 == node).map(var).collect();
                if node == self.source() {
                    exactly_one(&mut cnf, &outs);
                } else if node == self.destination() {
                    exactly_one(&mut cnf, &ins);
                } else {
                    at_most_one(&mut cnf, &ins);
                    at_most_one(&mut cnf, &outs);
                    for (from, to) in [(&ins, &outs), (&outs, &ins)] {
                        for &e in from.iter() {
                            let mut clause = vec![Lit::neg(e)];
                            clause.extend(to.iter().map(|&f| Lit::pos(f)));
                            cnf.add_clause(clause).expect("in range");
                        }
                    }
                }
            }
        }
        cnf
    }
}

/// Undirected multigraph; edge `i` is variable `i+1` in route encodings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(u, v) in &edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidModel(format!("edge {u}-{v} outside {vertex_count} vertices")));
            }
            if u == v {
                return Err(Error::InvalidModel(format!("self-loop at vertex {u}")));
            }
        }
        Ok(Graph { vertex_count, edges })
    }

    /// `v_count e_count` followed by one `u v` line per edge, vertices 0-based.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('c') && !l.starts_with('#'));
        let pair = |line: usize, l: &str| -> Result<(usize, usize)> {
            let nums: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::parse(line, format!("bad number {t:?}"))))
                .collect::<Result<_>>()?;
            match nums.as_slice() {
                [a, b] => Ok((*a, *b)),
                _ => Err(Error::parse(line, "expected two numbers")),
            }
        };
        let (line, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let (vertex_count, edge_count) = pair(line, header)?;
        let mut edges = Vec::with_capacity(edge_count);
        let mut last = line;
        for (line, l) in lines {
            edges.push(pair(line, l)?);
            last = line;
        }
        if edges.len() != edge_count {
            return Err(Error::parse(last, format!("header declares {edge_count} edges, found {}", edges.len())));
        }
        Graph::new(vertex_count, edges).map_err(|e| Error::parse(last, e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.vertex_count, self.edges.len());
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn incident(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&i| self.edges[i].0 == v || self.edges[i].1 == v).collect()
    }

    /// Edge sets forming a simple path between `s` and `t`.
    ///
    /// Degree constraints admit a path plus disjoint cycles; every cycle seen
    /// in a model is excluded by a clause, until no model has one.
    pub fn simple_routes(&self, s: usize, t: usize) -> Result<Cnf> {
        if s == t {
            return Err(Error::InvalidModel("route endpoints coincide".into()));
        }
        if s >= self.vertex_count || t >= self.vertex_count {
            return Err(Error::InvalidModel(format!("endpoint outside {} vertices", self.vertex_count)));
        }
        let m = self.edges.len();
        if m > MAX_ROUTE_EDGES {
            return Err(Error::TooManyVariables { what: "simple-route encoding", limit: MAX_ROUTE_EDGES as u32, actual: m as u32 });
        }
        let var = |i: usize| Var::new(i as u32 + 1);
        let mut cnf = Cnf::new(m as u32);
        for v in 0..self.vertex_count {
            let inc: Vec<Var> = self.incident(v).into_iter().map(var).collect();
            if v == s || v == t {
                exactly_one(&mut cnf, &inc);
                continue;
            }
            for (k, &e) in inc.iter().enumerate() {
                let mut clause = vec![Lit::neg(e)];
                clause.extend(inc.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &f)| Lit::pos(f)));
                cnf.add_clause(clause)?;
            }
            for a in 0..inc.len() {
                for b in a + 1..inc.len() {
                    for c in b + 1..inc.len() {
                        cnf.add_clause(vec![Lit::neg(inc[a]), Lit::neg(inc[b]), Lit::neg(inc[c])])?;
                    }
                }
            }
        }
        loop {
            let mut added = false;
            for bits in 0..1u32 << m {
                let values: Vec<bool> = (0..m).map(|i| bits >> i & 1 == 1).collect();
                if !cnf.evaluate_values(&values) {
                    continue;
                }
                for cycle in self.detached_components(&values, s) {
                    cnf.add_clause(cycle.into_iter().map(|i| Lit::neg(var(i))).collect())?;
                    added = true;
                }
            }
            if !added {
                return Ok(cnf);
            }
        }
    }

    /// Edge sets of chosen components not containing `s`.
    fn detached_components(&self, chosen: &[bool], s: usize) -> Vec<Vec<usize>> {
        let mut comp: Vec<usize> = (0..self.vertex_count).collect();
        fn find(comp: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while comp[r] != r {
                r = comp[r];
            }
            comp[x] = r;
            r
        }
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if chosen[i] {
                let (a, b) = (find(&mut comp, u), find(&mut comp, v));
                comp[a] = b;
            }
        }
        let root_s = find(&mut comp, s);
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
        for (i, &(u, _)) in self.edges.iter().enumerate() {
            if chosen[i] {
                let r = find(&mut comp, u);
                if r != root_s {
                    groups.entry(r).or_default().push(i);
                }
            }
        }
        groups.into_values().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(cnf: &Cnf) -> usize {
        let n = cnf.var_count();
        (0..1u64 << n)
            .filter(|&b| {
                let values: Vec<bool> = (0..n).map(|i| b >> i & 1 == 1).collect();
                cnf.evaluate_values(&values)
            })
            .count()
    }

    #[test]
    fn small_rankings() {
        assert_eq!(count(&RankingSpace::new(2).unwrap().cnf()), 2);
        assert_eq!(count(&RankingSpace::new(3).unwrap().cnf()), 6);
        assert!(RankingSpace::new(0).is_err());
        assert!(RankingSpace::new(9).is_err());
    }

    #[test]
    fn item_in_two_positions_is_rejected() {
        let space = RankingSpace::new(3).unwrap();
        let mut values = vec![false; 9];
        for (i, j) in [(1, 1), (2, 2), (2, 3), (3, 3)] {
            values[space.var_of(i, j).slot()] = true;
        }
        assert!(!space.cnf().evaluate_values(&values));
        assert_eq!(space.decode(&values), None);
        let mut ok = vec![false; 9];
        for (i, j) in [(2, 1), (3, 2), (1, 3)] {
            ok[space.var_of(i, j).slot()] = true;
        }
        assert_eq!(space.decode(&ok), Some(vec![2, 3, 1]));
    }

    #[test]
    fn grid_counts() {
        assert_eq!(count(&GridRouteSpace::new(1, 1).unwrap().cnf()), 2);
        assert_eq!(count(&GridRouteSpace::new(2, 2).unwrap().cnf()), 6);
        assert_eq!(count(&GridRouteSpace::new(3, 1).unwrap().cnf()), 4);
        assert!(GridRouteSpace::new(7, 1).is_err());
    }

    #[test]
    fn triangle_and_path_routes() {
        let tri = Graph::new(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(count(&tri.simple_routes(0, 2).unwrap()), 2);
        let path = Graph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        assert_eq!(count(&path.simple_routes(0, 2).unwrap()), 1);
        assert!(tri.simple_routes(1, 1).is_err());
    }

    #[test]
    fn detached_cycles_are_excluded() {
        // s-t edge plus a separate triangle.
        let g = Graph::new(5, vec![(0, 1), (2, 3), (3, 4), (2, 4)]).unwrap();
        assert_eq!(count(&g.simple_routes(0, 1).unwrap()), 1);
        let apart = Graph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        assert_eq!(count(&apart.simple_routes(0, 3).unwrap()), 0);
    }

    #[test]
    fn graph_text_round_trip() {
        let g = Graph::parse("4 3\n0 1\n1 2\n2 3\n").unwrap();
        assert_eq!(Graph::parse(&g.to_text()).unwrap(), g);
        assert!(Graph::parse("3 2\n0 1\n").is_err());
        assert!(Graph::parse("2 1\n0 5\n").is_err());
    }
}
