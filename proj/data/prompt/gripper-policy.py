class DomainPolicy(Policy):
    """Fill both grippers, carry the balls to their goal room, come back."""

    def choose(self, state, applicable):
        targets = {atom[1]: atom[2] for positive, atom in self.goal
                   if positive and atom[0] == "at"}
        robot = self.atoms(state, "at-robby")[0][1]
        carried = [atom[1] for atom in self.atoms(state, "carry")]
        misplaced = {atom[1]: atom[2] for atom in self.atoms(state, "at")
                     if targets.get(atom[1], atom[2]) != atom[2]}

        for i, (schema, *args) in enumerate(applicable):
            if schema == "drop" and targets.get(args[0]) == robot:
                return i
        if self.atoms(state, "free"):
            for i, (schema, *args) in enumerate(applicable):
                if schema == "pick" and misplaced.get(args[0]) == robot:
                    return i

        if carried:
            destination = targets[carried[0]]
        elif misplaced:
            destination = next(iter(misplaced.values()))
        else:
            return 0
        for i, (schema, *args) in enumerate(applicable):
            if schema == "move" and args[1] == destination:
                return i
        return 0
