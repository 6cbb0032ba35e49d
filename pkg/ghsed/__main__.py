from dotenv import load_dotenv
load_dotenv()

from ghsed.cli import main

main()
