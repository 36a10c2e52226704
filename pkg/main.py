"""EPR Witness - 메인 진입점"""

if __name__ == "__main__":
    import sys

    from epr_witness.cli import main
    sys.exit(main())
