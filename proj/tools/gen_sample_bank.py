#!/usr/bin/env python3
"""Regenerates data/sample-bank.json.

The sample bank is synthetic: it reproduces the structure of an ITSM
self-assessment bank (four processes, process-specific PA1.1 questions,
generic PA2.1..PA5.2 questions, observation/recommendation knowledge items)
without any proprietary question text.

Usage: gen_sample_bank.py [output-path]
"""

import json
import sys
from pathlib import Path

PROCESSES = [
    ("SLM", "Service Level Management"),
    ("CHG", "Change Management"),
    ("PRB", "Problem Management"),
    ("CFG", "Configuration Management"),
]

# Base practices per process. The PA1.1 split is 12/12/11/11.
PRACTICES = {
    "SLM": [
        "service level requirements are agreed with customers",
        "service level agreements are documented",
        "operational level agreements support each SLA",
        "service achievements are measured against targets",
        "service reports are produced for customers",
        "service reviews are held with customers",
        "SLA breaches are recorded",
        "service improvement plans are raised for breaches",
        "the service catalogue is aligned with agreed SLAs",
        "underpinning contracts are reviewed against SLAs",
        "customer satisfaction is surveyed",
        "SLA targets are revised when business needs change",
    ],
    "CHG": [
        "requests for change are recorded",
        "changes are classified by risk and impact",
        "a change advisory board reviews significant changes",
        "changes are authorised before build",
        "emergency changes follow a defined path",
        "changes are scheduled in a change calendar",
        "remediation plans exist for each change",
        "implemented changes are reviewed after deployment",
        "failed changes are analysed",
        "standard changes are pre-approved",
        "change records are linked to configuration items",
        "change success rates are reported",
    ],
    "PRB": [
        "identified problems are recorded",
        "problems are prioritised by business impact",
        "root cause analysis is performed for problems",
        "known errors are recorded in a known error database",
        "workarounds are documented for known errors",
        "trend analysis of incidents is used to find problems",
        "problem records are linked to incidents",
        "major problem reviews are held",
        "resolved problems are formally closed",
        "problem resolution raises requests for change when needed",
        "problem backlog age is monitored",
    ],
    "CFG": [
        "configuration items are identified",
        "a configuration management database is maintained",
        "relationships between configuration items are recorded",
        "configuration baselines are established",
        "configuration items are under change control",
        "configuration audits are performed",
        "configuration status is reported",
        "discrepancies found in audits are corrected",
        "configuration item owners are assigned",
        "configuration data is used by other processes",
        "the configuration model scope is defined",
    ],
}

# Generic practice statements per attribute; {p} is the assessed process.
GENERIC = {
    "PA2.1": [
        "objectives for the performance of {p} are identified",
        "the performance of {p} is planned",
        "the performance of {p} is monitored against plans",
        "the performance of {p} is adjusted when plans are not met",
        "responsibilities for performing {p} are defined",
        "authorities for performing {p} are assigned",
        "resources for performing {p} are identified",
        "resources for performing {p} are made available",
        "interfaces between parties involved in {p} are managed",
        "communication between parties involved in {p} is effective",
        "schedules for {p} activities are maintained",
        "estimates for {p} effort are recorded",
        "deviations in {p} performance are escalated",
        "performance targets for {p} are reviewed periodically",
        "staff performing {p} know the plan for their activities",
        "progress of {p} is reported to management",
    ],
    "PA2.2": [
        "requirements for the work products of {p} are defined",
        "requirements for documentation of {p} outputs are defined",
        "work products of {p} are identified",
        "work products of {p} are documented",
        "work products of {p} are placed under version control",
        "work products of {p} are reviewed",
        "work products of {p} are adjusted after review",
        "quality criteria for {p} work products are defined",
        "storage of {p} records follows agreed rules",
        "access to {p} records is controlled",
        "templates are used for {p} records",
        "records of {p} are retained for an agreed period",
        "work product reviews for {p} involve stakeholders",
        "changes to {p} work products are traceable",
        "defects in {p} work products are corrected",
        "the status of {p} work products is visible",
    ],
    "PA3.1": [
        "a standard process is defined for {p}",
        "the standard process for {p} describes its sequence of activities",
        "the standard process for {p} describes its interactions",
        "roles required for the standard process for {p} are identified",
        "competencies required for {p} are identified",
        "infrastructure required for {p} is identified",
        "the work environment required for {p} is identified",
        "methods for monitoring the standard process for {p} are defined",
        "the standard process for {p} is published to staff",
        "tailoring guidelines for the standard process for {p} exist",
        "the standard process for {p} is reviewed periodically",
        "the standard process for {p} aligns with organisational policy",
        "process owners for {p} are appointed",
        "policies for {p} are approved by management",
        "the standard process for {p} defines inputs and outputs",
        "the standard process for {p} defines entry and exit criteria",
    ],
    "PA3.2": [
        "a defined process for {p} is deployed from the standard process",
        "roles for the deployed process for {p} are assigned",
        "staff performing {p} are competent",
        "training for {p} is provided",
        "resources for the deployed process for {p} are available",
        "information needed for {p} is available",
        "infrastructure for {p} is available and maintained",
        "the work environment for {p} is maintained",
        "data on the effectiveness of {p} is collected",
        "data on the suitability of {p} is analysed",
        "improvement opportunities for {p} are identified from data",
        "the deployed process for {p} follows tailoring guidelines",
        "tools supporting {p} are in place",
        "staff know where the process description for {p} is kept",
        "records of {p} training are kept",
        "lessons learned from {p} are shared",
    ],
    "PA4.1": [
        "information needs for managing {p} are established",
        "measurement objectives for {p} are derived from information needs",
        "quantitative objectives for {p} performance are established",
        "measures for {p} are identified",
        "the frequency of {p} measurement is defined",
        "results of {p} measurement are collected",
        "results of {p} measurement are analysed",
        "results of {p} measurement are reported",
        "measurement results are used to characterise {p} performance",
        "measurement data for {p} is validated",
        "measurement data for {p} is stored securely",
        "measurement procedures for {p} are documented",
        "stakeholders review {p} measurement results",
        "targets for {p} measures are agreed",
        "measures for {p} are aligned to business goals",
        "{p} measurement results drive decisions",
    ],
    "PA4.2": [
        "analysis techniques are selected for controlling {p}",
        "control limits are established for {p} performance",
        "data on {p} is analysed for special causes of variation",
        "corrective action is taken when {p} exceeds control limits",
        "control limits for {p} are re-established after corrective action",
        "process variation in {p} is monitored",
        "{p} is kept within defined control limits",
        "trends in {p} performance are identified",
        "the capability of {p} is predicted from data",
        "corrective actions for {p} are tracked to closure",
        "control charts or equivalents are used for {p}",
        "causes of variation in {p} are documented",
        "statistical analysis of {p} is reviewed by management",
        "tools for controlling {p} are in place",
        "{p} data quality is sufficient for control",
        "staff understand how {p} is controlled",
    ],
    "PA5.1": [
        "improvement objectives for {p} are defined",
        "improvement objectives for {p} support business goals",
        "data is analysed to find causes of variation in {p}",
        "opportunities for best practice in {p} are identified",
        "innovation opportunities for {p} are identified",
        "new technologies are evaluated for {p}",
        "an implementation strategy exists for {p} improvements",
        "improvement proposals for {p} are evaluated",
        "improvement proposals for {p} are prioritised",
        "benefits of {p} improvements are estimated",
        "staff can propose improvements to {p}",
        "improvement results for {p} are communicated",
        "{p} is benchmarked against industry practice",
        "improvement objectives for {p} are reviewed",
        "resources are allocated to {p} improvement",
        "management sponsors {p} improvement",
    ],
    "PA5.2": [
        "the impact of changes to {p} is assessed",
        "changes to the standard process for {p} are managed",
        "changes to the defined process for {p} are managed",
        "changes to {p} are implemented according to the strategy",
        "the effectiveness of {p} changes is evaluated",
        "the effectiveness of {p} changes is compared with objectives",
        "stakeholders are informed of changes to {p}",
        "staff are trained in changes to {p}",
        "changes to {p} are piloted before rollout",
        "rollback of {p} changes is possible",
        "the improved process for {p} is documented",
        "improvement of {p} is continual",
        "results of {p} change evaluation are recorded",
        "unintended effects of {p} changes are monitored",
        "changes to {p} are aligned with other processes",
    ],
}

ALL_ROLES = ["ProcessManager", "ProcessPerformer", "ExternalStakeholder"]


def roles_for(index):
    # activity -> performer, outcome -> everyone, manager-oriented -> manager
    kind = index % 3
    if kind == 0:
        return ["ProcessPerformer"]
    if kind == 1:
        return list(ALL_ROLES)
    return ["ProcessManager"]


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "data" / "sample-bank.json"

    questions = []
    for pid, _ in PROCESSES:
        for i, practice in enumerate(PRACTICES[pid]):
            questions.append({
                "id": f"{pid}-1.1-{i + 1:02d}",
                "attribute": "PA1.1",
                "scope": {"process": pid},
                "text": f"Do you know if {practice}?",
                "roles": roles_for(i),
                "statement": practice,
            })
    for attr, practices in GENERIC.items():
        for i, practice in enumerate(practices):
            questions.append({
                "id": f"GEN-{attr[2:]}-{i + 1:02d}",
                "attribute": attr,
                "scope": "generic",
                "text": "Do you know if " + practice.replace("{p}", "the process") + "?",
                "roles": roles_for(i),
                "statement": practice.replace("{p}", "{process}"),
            })

    # 22 questions carry no knowledge item: every 8th question starting at 3.
    uncovered = {i for i in range(3, len(questions), 8)}
    assert len(uncovered) == 22, len(uncovered)

    items = []
    for i, q in enumerate(questions):
        statement = q.pop("statement")
        if i in uncovered:
            continue
        kid = "K-" + q["id"]
        items.append({
            "id": kid,
            "observation": f"Respondents are not confident that {statement}.",
            "recommendation": f"Establish and communicate the practice so that {statement}, "
                              "following ITIL guidance for the process.",
        })
        q["knowledge_item"] = kid

    bank = {
        "schema_version": 1,
        "processes": [{"id": pid, "name": name} for pid, name in PROCESSES],
        "questions": questions,
        "knowledge_items": items,
    }
    assert sum(1 for q in questions if q["attribute"] == "PA1.1") == 46
    assert sum(1 for q in questions if q["attribute"] != "PA1.1") == 127
    assert len(items) == 151
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(bank, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
