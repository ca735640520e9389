"""A fixed twelve-rule English fragment with agreement, case and subcategorization."""

GRAMMAR = """
:start s
:rule s: s [SUBJ: #1 PRED: #2] -> #1 np [AGR: #3 CASE: {nom}] #2 vp [AGR: #3]
:rule s-coord: s [LEFT: #1 RIGHT: #2] -> #1 s conj #2 s
:rule np-det: np [AGR: #1 DET: #2 N: #3] -> #2 det [AGR: #1] #3 n [AGR: #1]
:rule np-adj: np [AGR: #1 DET: #2 MOD: #3 N: #4] -> #2 det [AGR: #1] #3 adj #4 n [AGR: #1]
:rule np-pro: np [AGR: #1 CASE: #2 PRO: #3] -> #3 pro [AGR: #1 CASE: #2]
:rule np-name: np [AGR: #1 NAME: #2] -> #2 name [AGR: #1]
:rule np-pp: np [AGR: #1 HEAD: #2 MOD: #3] -> #2 np [AGR: #1] #3 pp
:rule vp-intr: vp [AGR: #1 V: #2] -> #2 v [AGR: #1 SUBCAT: {intr}]
:rule vp-tr: vp [AGR: #1 V: #2 OBJ: #3] -> #2 v [AGR: #1 SUBCAT: {tr}] #3 np [CASE: {acc}]
:rule vp-ditr: vp [AGR: #1 V: #2 OBJ: #3 OBJ2: #4] -> #2 v [AGR: #1 SUBCAT: {ditr}] #3 np [CASE: {acc}] #4 np [CASE: {acc}]
:rule vp-pp: vp [AGR: #1 HEAD: #2 MOD: #3] -> #2 vp [AGR: #1] #3 pp
:rule pp: pp [P: #1 OBJ: #2] -> #1 p #2 np [CASE: {acc}]
"""

LEXICON = """
the det
a det [AGR: {sg}]
dog n [AGR: {sg}]
dogs n [AGR: {pl}]
park n [AGR: {sg}]
big adj
kim name [AGR: {sg}]
he pro [AGR: {sg} CASE: {nom}]
him pro [AGR: {sg} CASE: {acc}]
they pro [AGR: {pl} CASE: {nom}]
them pro [AGR: {pl} CASE: {acc}]
sees v [AGR: {sg} SUBCAT: {tr}]
see v [AGR: {pl} SUBCAT: {tr}]
sleeps v [AGR: {sg} SUBCAT: {intr}]
sleep v [AGR: {pl} SUBCAT: {intr}]
gives v [AGR: {sg} SUBCAT: {ditr}]
in p
with p
and conj
"""
