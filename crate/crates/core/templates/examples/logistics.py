# Logistics: trucks and airplanes move packages between cities.
_cache = {}


def _static(task):
    key = id(task)
    if key not in _cache:
        in_city = {}
        for fact in task.static_facts:
            parts = fact.strip("()").split()
            if parts[0] == "in-city":
                in_city[parts[1]] = parts[2]
        _cache[key] = in_city
    return _cache[key]


def h(state, task):
    in_city = _static(task)
    where = {}
    for fact in state:
        parts = fact.strip("()").split()
        if parts[0] in ("at", "in"):
            where[parts[1]] = parts[2]
    total = 0
    for goal in task.goal:
        if goal in state:
            continue
        _, package, target = goal.strip("()").split()
        place = where.get(package)
        # a package inside a vehicle needs an unload
        if place not in in_city:
            total += 1
            place = where.get(place, place)
        if in_city.get(place) == in_city.get(target):
            total += 2
        else:
            total += 6
    return total
