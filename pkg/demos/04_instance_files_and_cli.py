"""Instance files, result documents, and the command-line tool."""

import subprocess
import sys
import tempfile

import cvxnetflow as cnf

text = """c a small two-route instance
p mccnfp 3 3
n 1 4
n 3 -4
a 1 2 lin 1
a 2 3 lin 1
a 1 3 lin 3
"""
net = cnf.parse_instance(text)
print(cnf.format_instance(net))

result = cnf.solve(net)
print(cnf.emit_result(result, net, "text"))

# %% Invalid input is reported with its line number
try:
    cnf.parse_instance("p mccnfp 2 1\nn 1 1\na 1 2 pow 1 0.5\n")
except cnf.ParseError as exc:
    print("ParseError:", exc)

# %% The same through the CLI; exit code 0 means solved
with tempfile.NamedTemporaryFile("w", suffix=".net", delete=False) as fh:
    fh.write(text)
proc = subprocess.run(
    [sys.executable, "-m", "cvxnetflow", "--input", fh.name, "--format", "json", "--oracle-check"],
    capture_output=True, text=True,
)
print("exit", proc.returncode)
print(proc.stdout)
