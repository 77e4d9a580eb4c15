# Visitall: a robot on a grid must visit every cell.
def h(state, task):
    unvisited = [g for g in task.goal if g not in state]
    if not unvisited:
        return 0
    return len(unvisited)
