import math


class DomainValueFunction(ValueFunction):
    """Counts the actions still needed to bring every ball to its goal room."""

    def evaluate(self, state):
        robot = self.atoms(state, "at-robby")[0][1]
        carried = {atom[1] for atom in self.atoms(state, "carry")}
        cost = 0
        for positive, atom in self.goal:
            if not positive or atom[0] != "at":
                continue
            _, ball, room = atom
            if self.holds(state, "at", ball, room):
                continue
            if ball in carried:
                cost += 1 if robot == room else 2  # (move,) drop
            else:
                cost += 3  # pick, move, drop
        return cost
