"""Independent expression-evaluator oracle for the FLOPs formulas.

The component formulas are written here as plain strings and evaluated by a
small AST walker, so the arithmetic path shares no code with the library.
Inputs stay Python ints, which makes every operation except the single /10
division exact at any magnitude; results must therefore match the library
digit for digit.
"""

import ast
import operator

FORMULAS = {
    "lm": "L*(4*S*d**2 + 2*S**2*d + 2*S*d*d_int) + S*d*vocab",
    "vision": "L_v*(6*N*d_v**2 + 2*N**2*d_v) + N*d_v*d",
    "prune": "2*V*d + V*Vp*d/10 + Vp*d",
    "mask": "L_d*(12*Q*d_m**2 + 2*Q**2*d_m + 2*Q*Vp*d_m) + Q*d_m*Vp",
    "temporal": "L_t*(Q_t*F*d**2 + 4*Q_t*d**2)",
    "vmtf": "L_f*(T_eff*d*d_f + Vp*d_v*d_f + 2*T_eff*Vp*d_f)",
}

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}


def eval_expr(expr: str, env: dict):
    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.Constant):
            return node.value
        if isinstance(node, ast.Name):
            return env[node.id]
        raise ValueError(f"unsupported syntax in oracle formula: {ast.dump(node)}")

    return walk(ast.parse(expr, mode="eval"))


def oracle_component(name: str, env: dict):
    return eval_expr(FORMULAS[name], env)
