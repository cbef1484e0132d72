"""
Workbook colors, fonts, fills, borders and alignments used by the convergence workbook.
"""
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side

# ---------------------------------------------------------------------------
# Colors
# ---------------------------------------------------------------------------
NAVY = "1F3A5F"
STEEL = "4A6FA5"
PALE_BLUE = "E8EEF7"
ALTERNATE_ROW = "F5F7FA"
WHITE = "FFFFFF"
BLACK = "000000"
GRAY_666 = "666666"
PASS_GREEN = "E8F5E9"
FAIL_RED = "FFEBEE"

# ---------------------------------------------------------------------------
# Fonts
# ---------------------------------------------------------------------------
TITLE_FONT = Font(name="Calibri", size=20, bold=True, color=NAVY)
SUBTITLE_FONT = Font(name="Calibri", size=11, italic=True, color=GRAY_666)
SECTION_FONT = Font(name="Calibri", size=13, bold=True, color=NAVY)
HEADER_FONT = Font(name="Calibri", size=11, bold=True, color=WHITE)
DATA_FONT = Font(name="Calibri", size=10, color=BLACK)
KPI_VALUE_FONT = Font(name="Calibri", size=20, bold=True, color=STEEL)
KPI_LABEL_FONT = Font(name="Calibri", size=9, color=GRAY_666)
NOTE_FONT = Font(name="Calibri", size=10, italic=True, color=GRAY_666)

# ---------------------------------------------------------------------------
# Fills, borders, alignments
# ---------------------------------------------------------------------------
HEADER_FILL = PatternFill(start_color=NAVY, end_color=NAVY, fill_type="solid")
ALTERNATE_FILL = PatternFill(start_color=ALTERNATE_ROW, end_color=ALTERNATE_ROW, fill_type="solid")
PASS_FILL = PatternFill(start_color=PASS_GREEN, end_color=PASS_GREEN, fill_type="solid")
FAIL_FILL = PatternFill(start_color=FAIL_RED, end_color=FAIL_RED, fill_type="solid")

THIN_BORDER = Border(
    left=Side(style="thin", color="CCCCCC"),
    right=Side(style="thin", color="CCCCCC"),
    top=Side(style="thin", color="CCCCCC"),
    bottom=Side(style="thin", color="CCCCCC"),
)
HEADER_BORDER = Border(bottom=Side(style="medium", color=NAVY))

CENTER = Alignment(horizontal="center", vertical="center")
LEFT = Alignment(horizontal="left", vertical="center")
RIGHT = Alignment(horizontal="right", vertical="center")

HIGHLIGHT_FILLS = {"pass": PASS_FILL, "fail": FAIL_FILL}
