pub const TEXT: &str = r#"Variables are numbered from 1. A literal is a nonzero integer; -v negates v.

cnf      DIMACS: `c` comment lines, header `p cnf <vars> <clauses>`, clauses
         as literals terminated by 0.

weights  One `<literal> <weight>` pair per line, `c` comments allowed.
         Literals not listed weigh 1.

vtree    Header `vtree <nodes>`, then `L <id> <var>` for leaves and
         `I <id> <left> <right>` for internal nodes; the last line is the
         root. `c` comment lines are ignored. Ids are in-order positions.

sdd      Header `sdd <nodes>`, then `F <id>`, `T <id>`, `L <id> <vtree> <lit>`
         and `D <id> <vtree> <k> <prime1> <sub1> ... <primek> <subk>`;
         children precede parents and the root is last. Read against a
         vtree file.

psdd     The sdd format plus `P <id> <e1> <w1> ... <ek> <wk>` lines giving
         the parameter of element e of decision node id.

nnf      c2d: header `nnf <nodes> <edges> <vars>`, then `L <lit>`,
         `A <k> <child>...` and `O <var> <k> <child>...`, children by line
         index from 0; the root is last.

csv      Dataset: header of variable names (column j is variable j+1) plus
         an optional `count` column; cells are 0 or 1.

graph    `<vertices> <edges>` then one `<u> <v>` line per undirected edge,
         vertices numbered from 0.

network  JSON {"variables": [names], "parents": [[names]...],
         "cpt": [[theta...]...]}. Row u of a CPT is the parent instantiation
         u in binary counting, the first parent most significant. An entry
         is Pr(var = true | u) or a pair [Pr(true), Pr(false)].

naive    JSON {"prior", "threshold", "features": [{"name",
bayes    "pos_likelihood", "neg_likelihood"}], "protected": [names]}.
         Numbers may be JSON numbers or exact strings such as "3/7".
         Decides positive iff Pr(+ | x) >= threshold.

forest   JSON {"features": [names], "trees": [node...], "protected": [names]}
         where a node is true, false or {"feature", "low", "high"}. An odd
         number of trees decides by majority.

terms    Literals separated by spaces or commas: `A`, `~A`, `!A`, `A=1`,
         `A=0`, or DIMACS integers. PSDD commands name variables X1, X2, ...

Exit codes: 0 success, 2 usage, 3 input format, 4 semantic (unsatisfiable
evidence, dataset row outside the circuit), 5 size limit exceeded.
"#;
