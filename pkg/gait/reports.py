"""
Evaluation outputs: report JSON, confusion CSV, sweep tables and a PDF summary
"""
import os
from datetime import datetime
from typing import Dict, Mapping, Optional

import pandas as pd
from django.conf import settings
from reportlab.lib import colors
from reportlab.lib.enums import TA_CENTER
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from .ml import CLASS_ORDER, EvalReport
from .storage import atomic_output, write_json, write_table

HEADER_COLOR = colors.HexColor('#1a5490')


def report_dir(outdir: Optional[str] = None) -> str:
    """Output directory, ``MEDIA_ROOT/reports`` unless given."""
    directory = outdir or os.path.join(settings.MEDIA_ROOT, 'reports')
    os.makedirs(directory, exist_ok=True)
    return directory


def report_stem(feature_set: str, scheme: str) -> str:
    timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
    return f'evaluation_{feature_set}_{scheme}_{timestamp}'


def confusion_frame(report: EvalReport, percent: bool = True) -> pd.DataFrame:
    """Confusion matrix with true classes as rows and predictions as columns, NW..CW/oos."""
    names = [c.value for c in CLASS_ORDER]
    values = report.percent_confusion if percent else report.confusion
    frame = pd.DataFrame(values, index=pd.Index(names, name='true'), columns=names)
    frame.columns.name = 'predicted'
    return frame


def evaluation_document(reports: Mapping[str, EvalReport], primary: str,
                        meta: Mapping[str, object]) -> Dict[str, object]:
    """JSON document of an evaluation; the primary direction's metrics sit at top level."""
    document = dict(meta)
    document.update(reports[primary].to_dict())
    document['direction'] = primary
    document['directions'] = {name: report.to_dict() for name, report in reports.items()}
    return document


def write_evaluation(document: Mapping[str, object], report: EvalReport, directory: str,
                     stem: str) -> Dict[str, str]:
    """Write the report JSON and the percent confusion CSV; returns their paths."""
    json_path = write_json(os.path.join(directory, f'{stem}.json'), document)
    csv_path = write_table(confusion_frame(report), os.path.join(directory, f'{stem}_confusion.csv'), index=True)
    return {'json': json_path, 'confusion': csv_path}


def _metric(value: float, halfwidth: float) -> str:
    if halfwidth:
        return f'{100 * value:.1f} ± {100 * halfwidth:.1f}'
    return f'{100 * value:.1f}'


def generate_pdf_report(reports: Mapping[str, EvalReport], primary: str, meta: Mapping[str, object],
                        path: str, beta_groups: Optional[pd.DataFrame] = None) -> str:
    """
    PDF summary of an evaluation run

    Args:
        reports: EvalReport per direction mode
        primary: Direction mode whose confusion matrix is tabulated
        meta: Run parameters listed on the first page
        path: Output PDF path
        beta_groups: Optional harmonic-ratio grouping table in percent

    Returns:
        Path to generated PDF file
    """
    styles = getSampleStyleSheet()
    title_style = ParagraphStyle(
        'ReportTitle',
        parent=styles['Heading1'],
        fontSize=20,
        textColor=HEADER_COLOR,
        spaceAfter=24,
        alignment=TA_CENTER,
    )
    story = [Paragraph('Gait classification report', title_style), Spacer(1, 0.2 * inch)]

    info = [[f'{key}:', str(value)] for key, value in meta.items()]
    info.append(['Date:', datetime.now().strftime('%Y-%m-%d %H:%M')])
    info_table = Table(info, colWidths=[1.8 * inch, 4.6 * inch])
    info_table.setStyle(TableStyle([
        ('BACKGROUND', (0, 0), (0, -1), colors.grey),
        ('TEXTCOLOR', (0, 0), (0, -1), colors.whitesmoke),
        ('FONTNAME', (0, 0), (0, -1), 'Helvetica-Bold'),
        ('FONTSIZE', (0, 0), (-1, -1), 9),
        ('BACKGROUND', (1, 0), (1, -1), colors.beige),
        ('GRID', (0, 0), (-1, -1), 0.5, colors.black),
    ]))
    story += [info_table, Spacer(1, 0.4 * inch)]

    story.append(Paragraph('Summary (%)', styles['Heading2']))
    summary = [['Direction', 'ACC', 'FPR', 'FNR', 'Folds']]
    for name, report in reports.items():
        summary.append([
            name,
            _metric(report.accuracy, report.ci95_halfwidth),
            _metric(report.fpr, report.fpr_ci95),
            _metric(report.fnr, report.fnr_ci95),
            str(report.n_folds),
        ])
    summary_table = Table(summary, colWidths=[1.2 * inch, 1.4 * inch, 1.4 * inch, 1.4 * inch, 0.8 * inch])
    summary_table.setStyle(_grid_style())
    story += [summary_table, Spacer(1, 0.4 * inch)]

    story.append(Paragraph(f'Confusion matrix, {primary} (% of true class)', styles['Heading2']))
    frame = confusion_frame(reports[primary])
    rows = [['true \\ predicted'] + list(frame.columns)]
    for label, values in frame.iterrows():
        rows.append([label] + [f'{value:.1f}' for value in values])
    confusion_table = Table(rows)
    confusion_table.setStyle(_grid_style())
    story.append(confusion_table)

    if beta_groups is not None:
        story += [Spacer(1, 0.4 * inch), Paragraph('Harmonic ratio groups (%)', styles['Heading2'])]
        rows = [['expected \\ estimated'] + list(beta_groups.columns)]
        for label, values in beta_groups.iterrows():
            rows.append([label] + [f'{value:.1f}' for value in values])
        beta_table = Table(rows)
        beta_table.setStyle(_grid_style())
        story.append(beta_table)

    with atomic_output(path) as temp:
        SimpleDocTemplate(temp, pagesize=A4).build(story)
    return path


def _grid_style() -> TableStyle:
    return TableStyle([
        ('BACKGROUND', (0, 0), (-1, 0), HEADER_COLOR),
        ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
        ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
        ('ALIGN', (0, 0), (-1, -1), 'CENTER'),
        ('FONTSIZE', (0, 0), (-1, -1), 9),
        ('GRID', (0, 0), (-1, -1), 0.5, colors.black),
        ('ROWBACKGROUNDS', (0, 1), (-1, -1), [colors.white, colors.lightgrey]),
    ])
