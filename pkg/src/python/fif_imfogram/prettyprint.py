import csv


def pretty_print_decomposition(info_csv):
    "Pretty-print the per-IMF summary written by decompose."
    with open(info_csv, newline="") as fp:
        r = csv.DictReader(fp)
        rows = list(r)

    if not rows:
        print("")
        print("no IMFs extracted; the input is its own trend")
        return

    total = sum(float(row["energy"]) for row in rows)

    print("")
    print("imf   filter_len   power   first_zero    energy  p_energy")
    print("---   ----------   -----   ----------    ------  --------")
    for row in rows:
        energy = float(row["energy"])
        pct = f"{energy / total * 100:.1f}" if total > 0 else "N/A"
        print(
            f"{row['imf']:>3}   {float(row['filter_length']):>10.2f}   {int(row['power']):>5}"
            f"   {float(row['first_zero_freq']):>10.3g}  {energy:>8.3g}  {pct:>7}%"
        )
