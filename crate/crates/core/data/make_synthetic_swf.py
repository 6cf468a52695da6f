"""Regenerates the synthetic SWF files in this directory.

The traces are synthetic: job sizes and run times are drawn from seeded
distributions shaped like a campus cluster (Gaia style) and a hypercube
machine (NASA iPSC style). They are not excerpts of archived logs.
"""

import random

FIELDS = 18


def line(job, submit, wait, run, procs, status=1):
    # job submit wait run alloc cpu mem req_procs req_time req_mem status uid gid exe queue part prev think
    values = [job, submit, wait, run, procs, -1, -1, procs, -1, -1, status, 1 + job % 17, 1, -1, 1, -1, -1, -1]
    assert len(values) == FIELDS
    return " ".join(str(v) for v in values)


def gaia_job(rng):
    procs = rng.choice([1, 1, 1, 1, 2, 2, 4, 4, 8, 12, 16, 24, 32])
    run = int(round(10 ** rng.uniform(1.5, 4.7)))
    return run, procs


def nasa_job(rng):
    procs = rng.choice([1, 1, 2, 4, 8, 16, 32, 64, 128])
    run = int(round(10 ** rng.uniform(0.5, 4.0)))
    return run, procs


GAIA_HEADER = """; Version: 2.2
; Computer: Gaia-style cluster (synthetic)
; Installation: synthetic trace generated for hybrid-sched tests
; Acknowledge: not an archived log
; Information: Standard Workload Format, 18 fields per job
; Conversion: make_synthetic_swf.py
; MaxJobs: {jobs}
; MaxRecords: {jobs}
; Preemption: No
; UnixStartTime: 1400000000
; TimeZoneString: Europe/Luxembourg
; MaxNodes: 151
; MaxProcs: 2004
; Queues: 1
; Partitions: 1
;"""

NASA_HEADER = """; Version: 2
; Computer: iPSC/860-style hypercube (synthetic)
; Installation: synthetic trace generated for hybrid-sched tests
; Acknowledge: not an archived log
; MaxJobs: {jobs}
; MaxRecords: {jobs}
; MaxNodes: 128
; MaxProcs: 128
; Note: runtime -1 and processors 0 mark jobs with missing data
;"""


def trace(rng, header, make_job, jobs, broken):
    out = [header.format(jobs=jobs)]
    submit = 0
    for job in range(1, jobs + 1):
        submit += rng.randint(0, 600)
        run, procs = make_job(rng)
        kind = broken.get(job)
        if kind == "run":
            run = -1
        elif kind == "zero":
            run = 0
        elif kind == "procs":
            procs = -1
        elif kind == "noprocs":
            procs = 0
        out.append(line(job, submit, rng.randint(0, 300), run, procs, 0 if kind else 1))
    return "\n".join(out) + "\n"


def main():
    rng = random.Random(20140501)
    with open("gaia_synthetic.swf", "w") as f:
        f.write(trace(rng, GAIA_HEADER, gaia_job, 1200, {}))

    rng = random.Random(7)
    gaia_broken = {5: "run", 12: "zero", 21: "procs", 33: "run"}
    with open("gaia_excerpt.swf", "w") as f:
        f.write(trace(rng, GAIA_HEADER, gaia_job, 34, gaia_broken))

    rng = random.Random(1993)
    nasa_broken = {3: "run", 9: "noprocs", 10: "noprocs", 17: "zero", 28: "run", 40: "procs"}
    with open("nasa_excerpt.swf", "w") as f:
        f.write(trace(rng, NASA_HEADER, nasa_job, 40, nasa_broken))


if __name__ == "__main__":
    main()
